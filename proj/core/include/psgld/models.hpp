// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "psgld/dataset.hpp"
#include "psgld/model.hpp"

namespace psgld {

/// Axis-aligned Gaussian N(mean, diag(cov_diag)) used as a direct target:
/// the "dataset" is a single term (N = n = 1) whose log-likelihood is the
/// Gaussian log-density, and the prior is flat.
class GaussianTarget final : public Model {
 public:
  GaussianTarget(ParamVector mean, ParamVector cov_diag);

  const ParamVector& mean() const { return mean_; }
  const ParamVector& cov_diag() const { return cov_; }

  std::string name() const override { return "gaussian"; }
  std::size_t dim() const override { return mean_.size(); }
  std::size_t data_size() const override { return 1; }
  double log_prior(std::span<const double>) const override { return 0.0; }
  using Model::prior_grad;
  void prior_grad(std::span<const double>, std::span<double> out) const override;
  double mean_log_likelihood(std::span<const double> theta, const Minibatch& batch) const override;
  void mean_grad(std::span<const double> theta, const Minibatch& batch,
                 std::span<double> out) const override;
  double total_log_likelihood(std::span<const double> theta) const override;
  bool has_diag_hessian() const override { return true; }
  ParamVector diag_hessian(std::span<const double> theta, const Minibatch& batch) const override;
  ParamVector initial_theta(Rng& rng) const override;

 private:
  ParamVector mean_;
  ParamVector cov_;
};

/// -(theta - mean) / cov_diag
ParamVector gaussian_log_grad(const GaussianTarget& target, std::span<const double> theta);

/// Numerically safe logistic function and its logarithm.
double sigmoid(double z);
double log_sigmoid(double z);

/// P(y = +1 | x, theta) = sigmoid(theta . x)
double blr_predict(std::span<const double> theta, std::span<const double> x);

/// Bayesian logistic regression with labels in {-1, +1} and a Gaussian prior.
/// Class index 0 is label -1, class index 1 is label +1.
class LogisticRegression final : public Classifier {
 public:
  LogisticRegression(std::shared_ptr<const Dataset> data, PriorConfig prior,
                     double init_std = 0.1);

  const Dataset& data() const { return *data_; }
  const PriorConfig& prior() const { return prior_; }

  std::string name() const override { return "blr"; }
  std::size_t dim() const override { return data_->cols(); }
  std::size_t data_size() const override { return data_->rows(); }
  double log_prior(std::span<const double> theta) const override;
  using Model::prior_grad;
  void prior_grad(std::span<const double> theta, std::span<double> out) const override;
  double mean_log_likelihood(std::span<const double> theta, const Minibatch& batch) const override;
  void mean_grad(std::span<const double> theta, const Minibatch& batch,
                 std::span<double> out) const override;
  double total_log_likelihood(std::span<const double> theta) const override;
  bool has_diag_hessian() const override { return true; }
  ParamVector diag_hessian(std::span<const double> theta, const Minibatch& batch) const override;
  ParamVector initial_theta(Rng& rng) const override;

  std::size_t num_classes() const override { return 2; }
  std::size_t class_of(int label) const override { return label > 0 ? 1 : 0; }
  std::vector<double> predict_proba(std::span<const double> theta,
                                    const Dataset& data) const override;

 private:
  std::shared_ptr<const Dataset> data_;
  PriorConfig prior_;
  double init_std_;
};

/// Offsets of one dense layer inside the flat parameter vector. Weights are
/// row-major (out x in), followed by the out biases.
struct LayerLayout {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;
};

/// Feed-forward classifier: ReLU hidden layers, softmax output, categorical
/// log-likelihood. Labels are class indices 0..K-1. Gradients come from
/// manual backpropagation over the batch.
class MlpModel final : public Classifier {
 public:
  /// layer_sizes = {input, hidden..., classes}; data may be null for a model
  /// that is only used for forward passes.
  MlpModel(std::vector<std::size_t> layer_sizes, PriorConfig prior,
           std::shared_ptr<const Dataset> data = nullptr);

  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  std::span<const LayerLayout> layout() const { return layout_; }

  std::string name() const override { return "mlp"; }
  std::size_t dim() const override { return dim_; }
  std::size_t data_size() const override;
  double log_prior(std::span<const double> theta) const override;
  using Model::prior_grad;
  void prior_grad(std::span<const double> theta, std::span<double> out) const override;
  double mean_log_likelihood(std::span<const double> theta, const Minibatch& batch) const override;
  void mean_grad(std::span<const double> theta, const Minibatch& batch,
                 std::span<double> out) const override;
  ParamVector initial_theta(Rng& rng) const override;

  std::size_t num_classes() const override { return sizes_.back(); }
  std::size_t class_of(int label) const override { return static_cast<std::size_t>(label); }
  std::vector<double> predict_proba(std::span<const double> theta,
                                    const Dataset& data) const override;

  /// Softmax output for a single input vector.
  std::vector<double> forward(std::span<const double> theta, std::span<const double> x) const;
  /// Final-layer pre-softmax activations for a single input vector.
  std::vector<double> logits(std::span<const double> theta, std::span<const double> x) const;

 private:
  const Dataset& bound_data() const;

  std::vector<std::size_t> sizes_;
  std::vector<LayerLayout> layout_;
  std::size_t dim_ = 0;
  PriorConfig prior_;
  std::shared_ptr<const Dataset> data_;
};

}  // namespace psgld
