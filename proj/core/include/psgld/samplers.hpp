// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "psgld/model.hpp"
#include "psgld/rng.hpp"
#include "psgld/schedule.hpp"
#include "psgld/trace.hpp"

namespace psgld {

enum class Algorithm { SGLD, pSGLD, SGD, RMSprop };

std::string to_string(Algorithm a);
/// Case-insensitive; throws ConfigError for unknown names.
Algorithm parse_algorithm(const std::string& name);
bool is_langevin(Algorithm a);

/// How the schedule's step sizes are interpreted.
///
/// Absolute: eps is used as written in the update rules.
/// PerDatum: eps multiplies the mean per-datum gradient g_bar + prior/N, as
///   in most optimizer and sampler code. The absolute step is eps/N for every
///   algorithm, so the factor 1/2 between the SGD and Langevin drifts is kept.
enum class EpsUnits { Absolute, PerDatum };

std::string to_string(EpsUnits u);
EpsUnits parse_eps_units(const std::string& name);
double absolute_step_factor(EpsUnits units, std::size_t N);

/// RMSprop second-moment state. G = 1 / (lambda + sqrt(V)) elementwise.
struct PreconditionerState {
  ParamVector V;
  double alpha = 0.99;
  double lambda = 1e-5;

  PreconditionerState() = default;
  explicit PreconditionerState(std::size_t dim, double alpha = 0.99, double lambda = 1e-5);

  void validate() const;
};

struct PrecondUpdate {
  ParamVector V;
  ParamVector G_diag;
};

/// V' = alpha V + (1 - alpha) g_bar^2,  G = 1 / (lambda + sqrt(V')).
PrecondUpdate precond_update(const PreconditionerState& state, const GradientEstimate& grad);
/// In-place form used by the chain driver: updates state.V and writes G.
void precond_update(PreconditionerState& state, std::span<const double> g_bar,
                    std::span<double> G_diag);

/// Divergence of the preconditioner w.r.t. theta for the diagonal RMSprop G,
/// differentiating only the current g_bar^2 term of V' (the history is held
/// fixed):
///
///   Gamma_i = -(1 - alpha) g_i h_i / (sqrt(V'_i) (lambda + sqrt(V'_i))^2)
///
/// with h_i = d g_i / d theta_i. state must already hold V'. Entries with
/// V'_i = 0 are 0.
ParamVector gamma_term(const PreconditionerState& state, const GradientEstimate& grad,
                       std::span<const double> diag_hess);

/// theta + eps (prior_grad + N g_bar)
ParamVector sgd_step(std::span<const double> theta, std::span<const double> prior_grad,
                     const GradientEstimate& grad, double eps);

/// theta + (eps/2)(prior_grad + N g_bar) + sqrt(eps) z, z standard normal.
ParamVector sgld_step(std::span<const double> theta, std::span<const double> prior_grad,
                      const GradientEstimate& grad, double eps, std::span<const double> z);
ParamVector sgld_step(std::span<const double> theta, std::span<const double> prior_grad,
                      const GradientEstimate& grad, double eps, Rng& rng);

/// theta + (eps/2)(G (prior_grad + N g_bar) + Gamma) + sqrt(eps G) z.
/// An empty gamma means Gamma = 0.
ParamVector psgld_step(std::span<const double> theta, std::span<const double> prior_grad,
                       const GradientEstimate& grad, std::span<const double> G_diag, double eps,
                       std::span<const double> gamma, std::span<const double> z);
ParamVector psgld_step(std::span<const double> theta, std::span<const double> prior_grad,
                       const GradientEstimate& grad, std::span<const double> G_diag, double eps,
                       std::span<const double> gamma, Rng& rng);

/// theta + eps G (prior_grad + N g_bar). No noise, no momentum, no bias
/// correction.
ParamVector rmsprop_step(std::span<const double> theta, std::span<const double> prior_grad,
                         const GradientEstimate& grad, std::span<const double> G_diag,
                         double eps);

struct SamplerConfig {
  Algorithm algorithm = Algorithm::pSGLD;
  StepSchedule schedule = StepSchedule::constant(1e-3);
  EpsUnits eps_units = EpsUnits::Absolute;
  std::size_t burn_in = 0;
  std::size_t thinning = 1;
  std::size_t total_iters = 1;
  std::size_t minibatch_size = 1;
  std::uint64_t seed = 0;
  bool gamma_term = false;
  double alpha = 0.99;
  double lambda = 1e-5;
  /// Starting point; model.initial_theta() when unset.
  std::optional<ParamVector> initial_theta;

  void validate() const;
  /// validate() plus model-dependent checks (batch size, Gamma support).
  void validate_for(const Model& model) const;
};

struct ChainObserver {
  /// Called after every iteration t (1-based) with the new state and eps_t.
  std::function<void(std::size_t t, std::span<const double> theta, double eps)> on_iteration;
  /// Called whenever a sample is recorded into the trace.
  std::function<void(std::size_t t, const Sample& sample)> on_sample;
};

/// Runs total_iters iterations of config.algorithm on model. Minibatches are
/// consecutive slices of a fresh seeded permutation each epoch; a trailing
/// partial batch is dropped. Iteration t is recorded when t > burn_in and
/// (t - burn_in) is a multiple of thinning. Same model, config and seed give
/// a bit-identical trace. Throws DivergenceError on a non-finite state.
SampleTrace run_chain(const Model& model, const SamplerConfig& config,
                      const ChainObserver& observer = {});

}  // namespace psgld
