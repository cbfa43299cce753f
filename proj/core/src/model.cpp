// SPDX-License-Identifier: Apache-2.0
#include "psgld/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "psgld/errors.hpp"

namespace psgld {

void PriorConfig::validate() const {
  if (!(sigma_sq > 0.0) || !std::isfinite(sigma_sq))
    throw ConfigError("prior variance sigma_sq must be positive and finite");
}

Minibatch::Minibatch(std::vector<std::size_t> indices) : indices_(std::move(indices)) {
  if (indices_.empty()) throw DatasetError("minibatch must not be empty");
  std::vector<std::size_t> sorted = indices_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw DatasetError("minibatch contains duplicate indices");
}

Minibatch Minibatch::range(std::size_t begin, std::size_t end) {
  std::vector<std::size_t> idx;
  idx.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) idx.push_back(i);
  return Minibatch(std::move(idx));
}

void Minibatch::check(std::size_t dataset_size) const {
  for (std::size_t i : indices_)
    if (i >= dataset_size)
      throw DatasetError("minibatch index " + std::to_string(i) + " out of range for " +
                         std::to_string(dataset_size) + " rows");
}

ParamVector log_prior_grad(std::span<const double> theta, const PriorConfig& prior) {
  ParamVector g(theta.size());
  const double inv = 1.0 / prior.sigma_sq;
  for (std::size_t i = 0; i < theta.size(); ++i) g[i] = -theta[i] * inv;
  return g;
}

double log_prior_density(std::span<const double> theta, const PriorConfig& prior) {
  double ss = 0.0;
  for (double t : theta) ss += t * t;
  const double d = static_cast<double>(theta.size());
  return -0.5 * ss / prior.sigma_sq - 0.5 * d * std::log(2.0 * std::numbers::pi * prior.sigma_sq);
}

ParamVector Model::diag_hessian(std::span<const double>, const Minibatch&) const {
  throw UnsupportedError(name() + " does not provide an analytic diagonal Hessian");
}

GradientEstimate Model::minibatch_grad(std::span<const double> theta,
                                       const Minibatch& batch) const {
  check_dim(theta);
  batch.check(data_size());
  GradientEstimate g;
  g.g_bar.assign(dim(), 0.0);
  g.n = batch.size();
  g.N = data_size();
  mean_grad(theta, batch, g.g_bar);
  return g;
}

ParamVector Model::prior_grad(std::span<const double> theta) const {
  check_dim(theta);
  ParamVector g(dim(), 0.0);
  prior_grad(theta, g);
  return g;
}

double Model::total_log_likelihood(std::span<const double> theta) const {
  return static_cast<double>(data_size()) * mean_log_likelihood(theta, full_batch());
}

double Model::log_posterior(std::span<const double> theta) const {
  check_dim(theta);
  return log_prior(theta) + total_log_likelihood(theta);
}

void Model::check_dim(std::span<const double> theta) const {
  if (theta.size() != dim())
    throw DatasetError(name() + ": parameter length " + std::to_string(theta.size()) +
                       " does not match model dimension " + std::to_string(dim()));
}

}  // namespace psgld
