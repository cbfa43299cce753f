// SPDX-License-Identifier: Apache-2.0
#include "psgld/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "psgld/errors.hpp"
#include "psgld/rng.hpp"

namespace psgld {

namespace {
constexpr std::size_t kMaxConsecutiveRejections = 10000;
}

void MhConfig::validate() const {
  if (!(proposal_std > 0.0) || !std::isfinite(proposal_std))
    throw ConfigError("proposal_std must be positive");
  if (steps < 1) throw ConfigError("steps must be >= 1");
  if (burn_in >= steps) throw ConfigError("burn_in must be smaller than steps");
  if (thinning < 1) throw ConfigError("thinning must be >= 1");
  for (double s : proposal_scales)
    if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("proposal scales must be positive");
}

MhResult mh_chain(const Model& model, const MhConfig& config) {
  config.validate();
  const std::size_t D = model.dim();
  if (!config.proposal_scales.empty() && config.proposal_scales.size() != D)
    throw ConfigError("proposal_scales length does not match model dimension");

  Rng init_rng(Rng::derive_seed(config.seed, 0));
  Rng rng(Rng::derive_seed(config.seed, 3));
  ParamVector theta = config.initial_theta ? *config.initial_theta : model.initial_theta(init_rng);
  if (theta.size() != D) throw ConfigError("initial theta has wrong length");
  double lp = model.log_posterior(theta);
  if (!std::isfinite(lp)) throw ConfigError("log posterior is not finite at the starting point");

  MhResult res;
  res.proposal_std = config.proposal_std;
  res.mean.assign(D, 0.0);
  SampleTrace& tr = res.trace;
  tr.dim = D;
  tr.total_iters = config.steps;
  tr.burn_in = config.burn_in;
  tr.thinning = config.thinning;
  tr.seed = config.seed;
  tr.algorithm = "MH";
  tr.schedule = "";

  ParamVector prop(D);
  std::size_t accepted = 0, run = 0;
  for (std::size_t t = 1; t <= config.steps; ++t) {
    for (std::size_t i = 0; i < D; ++i) {
      const double s = config.proposal_scales.empty() ? 1.0 : config.proposal_scales[i];
      prop[i] = theta[i] + config.proposal_std * s * rng.normal();
    }
    const double lp_new = model.log_posterior(prop);
    const double u = rng.uniform();
    if (std::isfinite(lp_new) && std::log(u) < lp_new - lp) {
      theta.swap(prop);
      lp = lp_new;
      ++accepted;
      run = 0;
    } else if (++run >= kMaxConsecutiveRejections) {
      throw ConfigError("MH rejected " + std::to_string(run) +
                        " consecutive proposals; reduce proposal_std");
    }
    if (t > config.burn_in) {
      for (std::size_t i = 0; i < D; ++i) res.mean[i] += theta[i];
      tr.S_T += 1.0;
      if ((t - config.burn_in) % config.thinning == 0) tr.samples.push_back(Sample{theta, 1.0});
    }
  }
  for (double& m : res.mean) m /= tr.S_T;
  res.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(config.steps);
  return res;
}

MhConfig tune_proposal(const Model& model, MhConfig config, std::size_t pilot_steps, double lo,
                       double hi) {
  if (!(lo > 0.0 && lo < hi && hi < 1.0)) throw ConfigError("invalid acceptance window");
  MhConfig pilot = config;
  pilot.steps = pilot_steps;
  pilot.burn_in = 0;
  pilot.thinning = pilot_steps;
  const double target = 0.5 * (lo + hi);
  for (int round = 0; round < 50; ++round) {
    pilot.seed = Rng::derive_seed(config.seed, 100 + static_cast<std::uint64_t>(round));
    double rate = 0.0;
    try {
      rate = mh_chain(model, pilot).acceptance_rate;
    } catch (const ConfigError&) {
      rate = 0.0;
    }
    if (rate >= lo && rate <= hi) break;
    // Acceptance falls roughly like exp(-c std^2) for small moves; a damped
    // multiplicative update converges in a handful of rounds.
    const double f = std::clamp(rate / target, 0.2, 3.0);
    pilot.proposal_std *= rate <= 0.0 ? 0.2 : std::pow(f, 0.8);
  }
  config.proposal_std = pilot.proposal_std;
  return config;
}

double grid_expectation(const Model& model, const std::vector<std::pair<double, double>>& bounds,
                        std::size_t resolution, const TestFunctional& phi) {
  const std::size_t D = model.dim();
  if (D > 2) throw ConfigError("grid_expectation supports at most two dimensions");
  if (bounds.size() != D) throw ConfigError("grid_expectation needs one (lo, hi) pair per dimension");
  if (resolution < 2) throw ConfigError("grid resolution must be >= 2");
  for (const auto& [lo, hi] : bounds)
    if (!(hi > lo)) throw ConfigError("grid bounds must satisfy lo < hi");

  const std::size_t n1 = D == 2 ? resolution : 1;
  std::vector<double> logp(resolution * n1);
  std::vector<double> phiv(resolution * n1);
  ParamVector theta(D);
  auto coord = [&](std::size_t d, std::size_t k) {
    const auto [lo, hi] = bounds[d];
    return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(resolution - 1);
  };
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < resolution; ++a) {
    for (std::size_t b = 0; b < n1; ++b) {
      theta[0] = coord(0, a);
      if (D == 2) theta[1] = coord(1, b);
      const double lp = model.log_posterior(theta);
      const double f = phi.eval(theta);
      if (!std::isfinite(lp) || !std::isfinite(f))
        throw DatasetError("grid_expectation: non-finite density or functional on the grid");
      logp[a * n1 + b] = lp;
      phiv[a * n1 + b] = f;
      mx = std::max(mx, lp);
    }
  }
  auto w = [&](std::size_t k) { return (k == 0 || k == resolution - 1) ? 0.5 : 1.0; };
  double num = 0.0, den = 0.0;
  for (std::size_t a = 0; a < resolution; ++a) {
    for (std::size_t b = 0; b < n1; ++b) {
      const double wt = w(a) * (D == 2 ? w(b) : 1.0) * std::exp(logp[a * n1 + b] - mx);
      num += wt * phiv[a * n1 + b];
      den += wt;
    }
  }
  return num / den;
}

}  // namespace psgld
