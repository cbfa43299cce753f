// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "psgld/model.hpp"

namespace psgld {

struct Sample {
  ParamVector theta;
  double eps = 1.0;

  bool operator==(const Sample&) const = default;
};

/// Recorded post-burn-in, thinned states of one chain.
///
/// S_T sums the step sizes of every post-burn-in iteration, including the
/// ones dropped by thinning, so S_T >= sum of the recorded eps.
struct SampleTrace {
  std::vector<Sample> samples;
  double S_T = 0.0;
  std::size_t dim = 0;
  std::size_t total_iters = 0;
  std::size_t burn_in = 0;
  std::size_t thinning = 1;
  std::uint64_t seed = 0;
  std::string algorithm;
  std::string schedule;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }

  /// Values of coordinate i across the recorded samples.
  std::vector<double> coordinate(std::size_t i) const;
  std::vector<double> eps() const;

  bool operator==(const SampleTrace&) const = default;
};

}  // namespace psgld
