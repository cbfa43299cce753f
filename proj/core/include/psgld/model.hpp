// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "psgld/dataset.hpp"
#include "psgld/rng.hpp"

namespace psgld {

/// Flat model parameter vector. All arithmetic is double precision.
using ParamVector = std::vector<double>;

/// Isotropic Gaussian prior N(0, sigma_sq * I).
struct PriorConfig {
  double sigma_sq = 1.0;

  void validate() const;
};

/// Mean minibatch log-likelihood gradient together with the batch and
/// dataset sizes the drift needs to rescale it.
struct GradientEstimate {
  ParamVector g_bar;
  std::size_t n = 1;
  std::size_t N = 1;
};

/// Row indices of one minibatch. Duplicates are rejected at construction;
/// range is checked against a concrete dataset size with check().
class Minibatch {
 public:
  explicit Minibatch(std::vector<std::size_t> indices);

  static Minibatch range(std::size_t begin, std::size_t end);

  std::span<const std::size_t> indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  void check(std::size_t dataset_size) const;

 private:
  std::vector<std::size_t> indices_;
};

/// grad log N(theta | 0, sigma_sq I) = -theta / sigma_sq
ParamVector log_prior_grad(std::span<const double> theta, const PriorConfig& prior);
double log_prior_density(std::span<const double> theta, const PriorConfig& prior);

/// Contract for every sampled target. Gradients are of log-densities
/// (ascent direction). Implementations are immutable after construction and
/// may be shared read-only across chains.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;
  /// N, the number of likelihood terms.
  virtual std::size_t data_size() const = 0;

  virtual double log_prior(std::span<const double> theta) const = 0;
  virtual void prior_grad(std::span<const double> theta, std::span<double> out) const = 0;

  /// Mean log-likelihood over the batch.
  virtual double mean_log_likelihood(std::span<const double> theta,
                                     const Minibatch& batch) const = 0;
  /// Writes the mean per-datum log-likelihood gradient over the batch to out.
  virtual void mean_grad(std::span<const double> theta, const Minibatch& batch,
                         std::span<double> out) const = 0;

  /// sum_i log p(d_i | theta) over the whole dataset.
  virtual double total_log_likelihood(std::span<const double> theta) const;

  virtual bool has_diag_hessian() const { return false; }
  /// Diagonal of the Hessian of the mean batch log-likelihood.
  /// Throws UnsupportedError unless has_diag_hessian().
  virtual ParamVector diag_hessian(std::span<const double> theta, const Minibatch& batch) const;

  /// Starting point for a chain.
  virtual ParamVector initial_theta(Rng& rng) const = 0;

  GradientEstimate minibatch_grad(std::span<const double> theta, const Minibatch& batch) const;
  ParamVector prior_grad(std::span<const double> theta) const;
  /// log p(theta) + sum_i log p(d_i | theta) over the whole dataset.
  double log_posterior(std::span<const double> theta) const;
  Minibatch full_batch() const { return Minibatch::range(0, data_size()); }

 protected:
  void check_dim(std::span<const double> theta) const;
};

/// Model whose likelihood is a classifier p(y | x, theta).
class Classifier : public Model {
 public:
  virtual std::size_t num_classes() const = 0;
  /// Class index used by predict_proba for a dataset label.
  virtual std::size_t class_of(int label) const = 0;
  /// Row-major (rows x num_classes) predictive probabilities for every row.
  virtual std::vector<double> predict_proba(std::span<const double> theta,
                                            const Dataset& data) const = 0;
};

}  // namespace psgld
