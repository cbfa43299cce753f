// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>

#include "psgld/errors.hpp"
#include "psgld/models.hpp"

namespace psgld {

GaussianTarget::GaussianTarget(ParamVector mean, ParamVector cov_diag)
    : mean_(std::move(mean)), cov_(std::move(cov_diag)) {
  if (mean_.empty() || mean_.size() != cov_.size())
    throw ConfigError("gaussian target: mean and covariance diagonal must have equal, nonzero length");
  for (double c : cov_)
    if (!(c > 0.0) || !std::isfinite(c))
      throw ConfigError("gaussian target: covariance diagonal entries must be positive");
}

void GaussianTarget::prior_grad(std::span<const double>, std::span<double> out) const {
  for (double& v : out) v = 0.0;
}

double GaussianTarget::mean_log_likelihood(std::span<const double> theta,
                                           const Minibatch&) const {
  return total_log_likelihood(theta);
}

double GaussianTarget::total_log_likelihood(std::span<const double> theta) const {
  double s = 0.0;
  for (std::size_t i = 0; i < mean_.size(); ++i) {
    const double d = theta[i] - mean_[i];
    s += -0.5 * d * d / cov_[i] - 0.5 * std::log(2.0 * std::numbers::pi * cov_[i]);
  }
  return s;
}

void GaussianTarget::mean_grad(std::span<const double> theta, const Minibatch&,
                               std::span<double> out) const {
  for (std::size_t i = 0; i < mean_.size(); ++i) out[i] = -(theta[i] - mean_[i]) / cov_[i];
}

ParamVector GaussianTarget::diag_hessian(std::span<const double>, const Minibatch&) const {
  ParamVector h(cov_.size());
  for (std::size_t i = 0; i < cov_.size(); ++i) h[i] = -1.0 / cov_[i];
  return h;
}

ParamVector GaussianTarget::initial_theta(Rng& rng) const {
  ParamVector t(dim());
  rng.fill_normal(t);
  return t;
}

ParamVector gaussian_log_grad(const GaussianTarget& target, std::span<const double> theta) {
  if (theta.size() != target.dim())
    throw DatasetError("gaussian_log_grad: dimension mismatch");
  ParamVector g(theta.size());
  target.mean_grad(theta, Minibatch({0}), g);
  return g;
}

}  // namespace psgld
