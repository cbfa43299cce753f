// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace psgld {

/// Per-chain random source.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The standard library distributions are implementation-defined,
/// so uniforms, indices and normals are derived here with fixed methods:
/// uniforms take the top 53 bits, indices use rejection sampling, normals
/// use the Marsaglia polar method. Traces are therefore reproducible at the
/// bit level across standard libraries for a given compiler/flags.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [0, n). n must be > 0.
  std::uint64_t index(std::uint64_t n);

  double normal();

  void fill_normal(std::span<double> out) {
    for (double& v : out) v = normal();
  }

  /// Independent stream for a sub-task (e.g. chain k of an experiment).
  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace psgld
