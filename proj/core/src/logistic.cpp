// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "psgld/errors.hpp"
#include "psgld/models.hpp"

namespace psgld {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double log_sigmoid(double z) {
  if (z >= 0.0) return -std::log1p(std::exp(-z));
  return z - std::log1p(std::exp(z));
}

double blr_predict(std::span<const double> theta, std::span<const double> x) {
  if (theta.size() != x.size()) throw DatasetError("blr_predict: dimension mismatch");
  double z = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) z += theta[i] * x[i];
  return sigmoid(z);
}

LogisticRegression::LogisticRegression(std::shared_ptr<const Dataset> data, PriorConfig prior,
                                       double init_std)
    : data_(std::move(data)), prior_(prior), init_std_(init_std) {
  if (!data_) throw DatasetError("logistic regression needs a dataset");
  prior_.validate();
  for (int y : data_->labels())
    if (y != 1 && y != -1)
      throw DatasetError(data_->name() + ": logistic regression labels must be -1 or +1");
}

double LogisticRegression::log_prior(std::span<const double> theta) const {
  return log_prior_density(theta, prior_);
}

void LogisticRegression::prior_grad(std::span<const double> theta, std::span<double> out) const {
  const double inv = 1.0 / prior_.sigma_sq;
  for (std::size_t i = 0; i < theta.size(); ++i) out[i] = -theta[i] * inv;
}

double LogisticRegression::mean_log_likelihood(std::span<const double> theta,
                                               const Minibatch& batch) const {
  double s = 0.0;
  for (std::size_t r : batch.indices()) {
    const double y = data_->label(r);
    s += log_sigmoid(y * data_->dot(r, theta));
  }
  return s / static_cast<double>(batch.size());
}

double LogisticRegression::total_log_likelihood(std::span<const double> theta) const {
  double s = 0.0;
  for (std::size_t r = 0; r < data_->rows(); ++r)
    s += log_sigmoid(data_->label(r) * data_->dot(r, theta));
  return s;
}

void LogisticRegression::mean_grad(std::span<const double> theta, const Minibatch& batch,
                                   std::span<double> out) const {
  for (double& v : out) v = 0.0;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  // d/dtheta log sigmoid(y theta.x) = sigmoid(-y theta.x) y x
  for (std::size_t r : batch.indices()) {
    const double y = data_->label(r);
    const double w = sigmoid(-y * data_->dot(r, theta)) * y * inv_n;
    data_->axpy(r, w, out);
  }
}

ParamVector LogisticRegression::diag_hessian(std::span<const double> theta,
                                             const Minibatch& batch) const {
  check_dim(theta);
  batch.check(data_size());
  ParamVector h(dim(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (std::size_t r : batch.indices()) {
    const double z = data_->dot(r, theta);
    const double w = -sigmoid(z) * sigmoid(-z) * inv_n;
    data_->for_each_nonzero(r, [&](std::size_t j, double x) { h[j] += w * x * x; });
  }
  return h;
}

ParamVector LogisticRegression::initial_theta(Rng& rng) const {
  ParamVector t(dim());
  for (double& v : t) v = init_std_ * rng.normal();
  return t;
}

std::vector<double> LogisticRegression::predict_proba(std::span<const double> theta,
                                                      const Dataset& data) const {
  if (data.cols() != dim()) throw DatasetError("predict_proba: feature dimension mismatch");
  std::vector<double> p(2 * data.rows());
  for (std::size_t r = 0; r < data.rows(); ++r) {
    const double z = data.dot(r, theta);
    p[2 * r] = sigmoid(-z);
    p[2 * r + 1] = sigmoid(z);
  }
  return p;
}

}  // namespace psgld
