// SPDX-License-Identifier: Apache-2.0
#include "psgld/samplers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "psgld/errors.hpp"

namespace psgld {
namespace {

// Scaled so that a finite vector never reports an overflowed norm.
double l2_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  if (m == 0.0 || !std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += (x / m) * (x / m);
  return m * std::sqrt(s);
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void require_len(std::span<const double> v, std::size_t d, const char* what) {
  if (v.size() != d)
    throw DatasetError(std::string(what) + ": expected length " + std::to_string(d) + ", got " +
                       std::to_string(v.size()));
}

void check_step_inputs(std::span<const double> theta, std::span<const double> prior_grad,
                       const GradientEstimate& grad, double eps) {
  require_len(prior_grad, theta.size(), "prior_grad");
  require_len(grad.g_bar, theta.size(), "g_bar");
  if (!(eps > 0.0)) throw ConfigError("step size must be positive");
}

ParamVector finish(ParamVector out, std::span<const double> theta) {
  if (!all_finite(out)) throw DivergenceError(0, l2_norm(theta));
  return out;
}

// The update kernels below are shared by the public step functions and the
// chain driver so both produce identical bits.

void sgd_into(std::span<const double> theta, std::span<const double> prior,
              std::span<const double> g, double N, double eps, std::span<double> out) {
  for (std::size_t i = 0; i < theta.size(); ++i) out[i] = theta[i] + eps * (prior[i] + N * g[i]);
}

void sgld_into(std::span<const double> theta, std::span<const double> prior,
               std::span<const double> g, double N, double eps, std::span<const double> z,
               std::span<double> out) {
  const double h = 0.5 * eps;
  const double s = std::sqrt(eps);
  for (std::size_t i = 0; i < theta.size(); ++i)
    out[i] = theta[i] + h * (prior[i] + N * g[i]) + s * z[i];
}

void psgld_into(std::span<const double> theta, std::span<const double> prior,
                std::span<const double> g, double N, std::span<const double> G, double eps,
                std::span<const double> gamma, std::span<const double> z, std::span<double> out) {
  const double h = 0.5 * eps;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    double d = G[i] * (prior[i] + N * g[i]);
    if (!gamma.empty()) d += gamma[i];
    out[i] = theta[i] + h * d + std::sqrt(eps * G[i]) * z[i];
  }
}

void rmsprop_into(std::span<const double> theta, std::span<const double> prior,
                  std::span<const double> g, double N, std::span<const double> G, double eps,
                  std::span<double> out) {
  for (std::size_t i = 0; i < theta.size(); ++i)
    out[i] = theta[i] + eps * (G[i] * (prior[i] + N * g[i]));
}

void gamma_into(std::span<const double> V, double alpha, double lambda,
                std::span<const double> g, std::span<const double> h, std::span<double> out) {
  for (std::size_t i = 0; i < V.size(); ++i) {
    if (V[i] == 0.0) {
      out[i] = 0.0;
      continue;
    }
    const double s = std::sqrt(V[i]);
    const double d = lambda + s;
    out[i] = -(1.0 - alpha) * g[i] * h[i] / (s * d * d);
  }
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::SGLD: return "SGLD";
    case Algorithm::pSGLD: return "pSGLD";
    case Algorithm::SGD: return "SGD";
    case Algorithm::RMSprop: return "RMSprop";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  const std::string n = lower(name);
  if (n == "sgld") return Algorithm::SGLD;
  if (n == "psgld") return Algorithm::pSGLD;
  if (n == "sgd") return Algorithm::SGD;
  if (n == "rmsprop") return Algorithm::RMSprop;
  throw ConfigError("unknown algorithm '" + name + "' (expected SGLD, pSGLD, SGD or RMSprop)");
}

bool is_langevin(Algorithm a) { return a == Algorithm::SGLD || a == Algorithm::pSGLD; }

std::string to_string(EpsUnits u) { return u == EpsUnits::Absolute ? "absolute" : "per_datum"; }

EpsUnits parse_eps_units(const std::string& name) {
  const std::string n = lower(name);
  if (n == "absolute") return EpsUnits::Absolute;
  if (n == "per_datum") return EpsUnits::PerDatum;
  throw ConfigError("unknown eps_units '" + name + "' (expected absolute or per_datum)");
}

double absolute_step_factor(EpsUnits units, std::size_t N) {
  if (units == EpsUnits::Absolute) return 1.0;
  if (N == 0) throw ConfigError("per_datum step sizes need a dataset");
  return 1.0 / static_cast<double>(N);
}

PreconditionerState::PreconditionerState(std::size_t dim, double alpha_, double lambda_)
    : V(dim, 0.0), alpha(alpha_), lambda(lambda_) {
  validate();
}

void PreconditionerState::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be positive");
  for (double v : V)
    if (!(v >= 0.0)) throw ConfigError("preconditioner V entries must be nonnegative");
}

void precond_update(PreconditionerState& state, std::span<const double> g_bar,
                    std::span<double> G_diag) {
  const double a = state.alpha;
  const double b = 1.0 - a;
  for (std::size_t i = 0; i < state.V.size(); ++i) {
    state.V[i] = a * state.V[i] + b * g_bar[i] * g_bar[i];
    G_diag[i] = 1.0 / (state.lambda + std::sqrt(state.V[i]));
  }
}

PrecondUpdate precond_update(const PreconditionerState& state, const GradientEstimate& grad) {
  require_len(grad.g_bar, state.V.size(), "g_bar");
  PreconditionerState next = state;
  PrecondUpdate u;
  u.G_diag.resize(state.V.size());
  precond_update(next, grad.g_bar, u.G_diag);
  u.V = std::move(next.V);
  return u;
}

ParamVector gamma_term(const PreconditionerState& state, const GradientEstimate& grad,
                       std::span<const double> diag_hess) {
  require_len(grad.g_bar, state.V.size(), "g_bar");
  require_len(diag_hess, state.V.size(), "diag_hess");
  ParamVector out(state.V.size());
  gamma_into(state.V, state.alpha, state.lambda, grad.g_bar, diag_hess, out);
  return out;
}

ParamVector sgd_step(std::span<const double> theta, std::span<const double> prior_grad,
                     const GradientEstimate& grad, double eps) {
  check_step_inputs(theta, prior_grad, grad, eps);
  ParamVector out(theta.size());
  sgd_into(theta, prior_grad, grad.g_bar, static_cast<double>(grad.N), eps, out);
  return finish(std::move(out), theta);
}

ParamVector sgld_step(std::span<const double> theta, std::span<const double> prior_grad,
                      const GradientEstimate& grad, double eps, std::span<const double> z) {
  check_step_inputs(theta, prior_grad, grad, eps);
  require_len(z, theta.size(), "noise");
  ParamVector out(theta.size());
  sgld_into(theta, prior_grad, grad.g_bar, static_cast<double>(grad.N), eps, z, out);
  return finish(std::move(out), theta);
}

ParamVector sgld_step(std::span<const double> theta, std::span<const double> prior_grad,
                      const GradientEstimate& grad, double eps, Rng& rng) {
  ParamVector z(theta.size());
  rng.fill_normal(z);
  return sgld_step(theta, prior_grad, grad, eps, z);
}

ParamVector psgld_step(std::span<const double> theta, std::span<const double> prior_grad,
                       const GradientEstimate& grad, std::span<const double> G_diag, double eps,
                       std::span<const double> gamma, std::span<const double> z) {
  check_step_inputs(theta, prior_grad, grad, eps);
  require_len(G_diag, theta.size(), "G_diag");
  require_len(z, theta.size(), "noise");
  if (!gamma.empty()) require_len(gamma, theta.size(), "gamma");
  ParamVector out(theta.size());
  psgld_into(theta, prior_grad, grad.g_bar, static_cast<double>(grad.N), G_diag, eps, gamma, z,
             out);
  return finish(std::move(out), theta);
}

ParamVector psgld_step(std::span<const double> theta, std::span<const double> prior_grad,
                       const GradientEstimate& grad, std::span<const double> G_diag, double eps,
                       std::span<const double> gamma, Rng& rng) {
  ParamVector z(theta.size());
  rng.fill_normal(z);
  return psgld_step(theta, prior_grad, grad, G_diag, eps, gamma, z);
}

ParamVector rmsprop_step(std::span<const double> theta, std::span<const double> prior_grad,
                         const GradientEstimate& grad, std::span<const double> G_diag,
                         double eps) {
  check_step_inputs(theta, prior_grad, grad, eps);
  require_len(G_diag, theta.size(), "G_diag");
  ParamVector out(theta.size());
  rmsprop_into(theta, prior_grad, grad.g_bar, static_cast<double>(grad.N), G_diag, eps, out);
  return finish(std::move(out), theta);
}

void SamplerConfig::validate() const {
  schedule.validate();
  if (total_iters < 1) throw ConfigError("total_iters must be >= 1");
  if (burn_in >= total_iters) throw ConfigError("burn_in must be smaller than total_iters");
  if (thinning < 1) throw ConfigError("thinning must be >= 1");
  if (thinning > total_iters - burn_in)
    throw ConfigError("thinning must not exceed total_iters - burn_in");
  if (minibatch_size < 1) throw ConfigError("minibatch_size must be >= 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be positive");
  if (gamma_term && algorithm != Algorithm::pSGLD)
    throw ConfigError("gamma_term applies to pSGLD only");
}

void SamplerConfig::validate_for(const Model& model) const {
  validate();
  if (model.data_size() == 0) throw ConfigError(model.name() + ": model has no data bound");
  if (minibatch_size > model.data_size())
    throw ConfigError("minibatch_size " + std::to_string(minibatch_size) +
                      " exceeds dataset size " + std::to_string(model.data_size()));
  if (gamma_term && !model.has_diag_hessian())
    throw ConfigError("gamma_term requires a diagonal Hessian, which " + model.name() +
                      " does not provide");
  if (initial_theta && initial_theta->size() != model.dim())
    throw ConfigError("initial_theta length does not match model dimension");
}

std::vector<double> SampleTrace::coordinate(std::size_t i) const {
  if (i >= dim) throw DatasetError("coordinate index out of range");
  std::vector<double> v(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) v[k] = samples[k].theta[i];
  return v;
}

std::vector<double> SampleTrace::eps() const {
  std::vector<double> v(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) v[k] = samples[k].eps;
  return v;
}

SampleTrace run_chain(const Model& model, const SamplerConfig& config,
                      const ChainObserver& observer) {
  config.validate_for(model);
  const std::size_t D = model.dim();
  const std::size_t N = model.data_size();
  const std::size_t n = config.minibatch_size;
  const double Nd = static_cast<double>(N);
  const StepSchedule schedule =
      config.schedule.scaled(absolute_step_factor(config.eps_units, N));

  Rng init_rng(Rng::derive_seed(config.seed, 0));
  Rng batch_rng(Rng::derive_seed(config.seed, 1));
  Rng noise_rng(Rng::derive_seed(config.seed, 2));

  ParamVector theta = config.initial_theta ? *config.initial_theta : model.initial_theta(init_rng);
  if (theta.size() != D) throw ConfigError("initial theta has wrong length");

  SampleTrace trace;
  trace.dim = D;
  trace.total_iters = config.total_iters;
  trace.burn_in = config.burn_in;
  trace.thinning = config.thinning;
  trace.seed = config.seed;
  trace.algorithm = to_string(config.algorithm) + (config.gamma_term ? "+gamma" : "");
  trace.schedule = config.schedule.describe();
  if (config.eps_units != EpsUnits::Absolute) trace.schedule += ";units=" + to_string(config.eps_units);
  trace.samples.reserve((config.total_iters - config.burn_in) / config.thinning);

  std::vector<std::size_t> perm(N);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::size_t pos = N;

  ParamVector g(D), prior(D), G(D), gamma, z(D), next(D);
  PreconditionerState state;
  const bool preconditioned =
      config.algorithm == Algorithm::pSGLD || config.algorithm == Algorithm::RMSprop;
  if (preconditioned) state = PreconditionerState(D, config.alpha, config.lambda);
  if (config.gamma_term) gamma.assign(D, 0.0);

  for (std::size_t t = 1; t <= config.total_iters; ++t) {
    if (pos + n > N) {
      for (std::size_t i = N - 1; i > 0; --i) std::swap(perm[i], perm[batch_rng.index(i + 1)]);
      pos = 0;
    }
    const Minibatch batch(std::vector<std::size_t>(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                                                   perm.begin() + static_cast<std::ptrdiff_t>(pos + n)));
    pos += n;
    const double eps = schedule.at(t);

    model.mean_grad(theta, batch, g);
    model.prior_grad(theta, prior);

    switch (config.algorithm) {
      case Algorithm::SGD:
        sgd_into(theta, prior, g, Nd, eps, next);
        break;
      case Algorithm::SGLD:
        noise_rng.fill_normal(z);
        sgld_into(theta, prior, g, Nd, eps, z, next);
        break;
      case Algorithm::pSGLD:
        precond_update(state, g, G);
        if (config.gamma_term) {
          const ParamVector h = model.diag_hessian(theta, batch);
          gamma_into(state.V, state.alpha, state.lambda, g, h, gamma);
        }
        noise_rng.fill_normal(z);
        psgld_into(theta, prior, g, Nd, G, eps, gamma, z, next);
        break;
      case Algorithm::RMSprop:
        precond_update(state, g, G);
        rmsprop_into(theta, prior, g, Nd, G, eps, next);
        break;
    }

    if (!all_finite(next)) throw DivergenceError(t, l2_norm(theta));
    theta.swap(next);

    if (t > config.burn_in) {
      trace.S_T += eps;
      if ((t - config.burn_in) % config.thinning == 0) {
        trace.samples.push_back(Sample{theta, eps});
        if (observer.on_sample) observer.on_sample(t, trace.samples.back());
      }
    }
    if (observer.on_iteration) observer.on_iteration(t, theta, eps);
  }
  return trace;
}

}  // namespace psgld
