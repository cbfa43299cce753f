// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "psgld/diagnostics.hpp"
#include "psgld/model.hpp"
#include "psgld/trace.hpp"

namespace psgld {

/// Random-walk Metropolis-Hastings on the full-data posterior.
struct MhConfig {
  double proposal_std = 0.1;
  /// Optional per-coordinate proposal scales, multiplied by proposal_std.
  std::vector<double> proposal_scales;
  std::size_t steps = 1;
  std::size_t burn_in = 0;
  /// Only every thinning-th post-burn-in state is stored; the running mean
  /// still covers all of them.
  std::size_t thinning = 1;
  std::uint64_t seed = 0;
  std::optional<ParamVector> initial_theta;

  void validate() const;
};

struct MhResult {
  SampleTrace trace;
  /// Mean over every post-burn-in state.
  ParamVector mean;
  double acceptance_rate = 0.0;
  double proposal_std = 0.0;
};

/// Proposals theta + proposal_std * scale * z are accepted with probability
/// min(1, exp(delta log posterior)). Throws ConfigError after 10^4
/// consecutive rejections.
MhResult mh_chain(const Model& model, const MhConfig& config);

/// Adjusts config.proposal_std with short pilot runs from the config's
/// starting point until the acceptance rate lies in [lo, hi]. Returns the
/// tuned config.
MhConfig tune_proposal(const Model& model, MhConfig config, std::size_t pilot_steps = 2000,
                       double lo = 0.25, double hi = 0.40);

/// Normalized trapezoid-rule expectation of phi under exp(log_posterior)
/// on a regular grid, for D <= 2. bounds holds (lo, hi) per dimension and
/// should span at least six posterior standard deviations.
double grid_expectation(const Model& model, const std::vector<std::pair<double, double>>& bounds,
                        std::size_t resolution, const TestFunctional& phi);

}  // namespace psgld
