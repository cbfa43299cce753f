// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "psgld/dataset.hpp"
#include "psgld/model.hpp"
#include "psgld/trace.hpp"

namespace psgld {

/// Scalar function of the parameters, phi(theta).
struct TestFunctional {
  std::string name;
  std::function<double(std::span<const double>)> eval;

  static TestFunctional coordinate(std::size_t i);
  /// theta_i^2
  static TestFunctional coordinate_square(std::size_t i);
};

/// A(t) = 1/(T - t) sum_i (v_i - mean)(v_{i+t} - mean) for t = 0..max_lag.
/// Requires T >= 2 and max_lag < T. A constant series gives all zeros.
std::vector<double> autocovariance(std::span<const double> values, std::size_t max_lag);

/// Integrated autocorrelation time tau = 1/2 + sum_{t>=1} gamma(t),
/// truncated with Geyer's initial positive sequence: lags are summed in
/// pairs gamma(2k) + gamma(2k+1) up to the first pair that is <= 0. Clamped
/// to >= 1/2. Throws DegenerateTraceError when A(0) == 0.
double act(std::span<const double> A);

/// Same estimator computed lag by lag from the raw series, so only the lags
/// the truncation actually needs are evaluated.
double act_of(std::span<const double> values);

/// M = T / (2 tau)
double ess(std::size_t T, double tau);
double ess_of(std::span<const double> values);

/// Monte Carlo standard error of the series mean, sqrt(A(0) / M).
double mc_standard_error(std::span<const double> values);

/// Smallest per-coordinate ESS over the trace.
double min_ess(const SampleTrace& trace);

/// weighted: sum eps_k phi(theta_k) / sum eps_k over the recorded samples,
/// otherwise the plain mean. Throws DegenerateTraceError on an empty trace.
double posterior_average(const SampleTrace& trace, const TestFunctional& phi, bool weighted);
ParamVector posterior_mean(const SampleTrace& trace, bool weighted = false);

/// Row-major D x D covariance of the recorded samples, normalized by 1/n.
std::vector<double> sample_covariance(const SampleTrace& trace);

/// Frobenius norm of sample_covariance(trace) - true_cov (row-major D x D).
/// Needs at least two samples.
double covariance_error(const SampleTrace& trace, std::span<const double> true_cov);

/// Running mean of per-sample predictive distributions over a fixed set of
/// inputs (rows x classes, row-major).
class PredictiveEnsemble {
 public:
  PredictiveEnsemble(const Classifier& model, const Dataset& inputs);

  void add(std::span<const double> theta);
  std::size_t size() const { return count_; }
  /// Current ensemble mean; throws DegenerateTraceError before any add().
  std::vector<double> mean() const;
  /// Test error (percent) of the current ensemble on the inputs' labels.
  double test_error() const;

 private:
  const Classifier& model_;
  const Dataset& inputs_;
  std::vector<double> sum_;
  std::size_t count_ = 0;
};

/// Unweighted mean over the trace of p(y | x, theta_k), rows x classes.
std::vector<double> predictive_estimate(const SampleTrace& trace, const Classifier& model,
                                        const Dataset& inputs);
/// Single-input form.
std::vector<double> predictive_estimate(const SampleTrace& trace, const Classifier& model,
                                        std::span<const double> x);

/// Percentage of rows whose argmax class (ties to the lowest index) differs
/// from the label. probs is rows x model.num_classes().
double test_error(std::span<const double> probs, const Classifier& model, const Dataset& test);
double test_error(const SampleTrace& trace, const Classifier& model, const Dataset& test);

/// Keeps recorded samples 0, k, 2k, ...; S_T and provenance are preserved and
/// the thinning metadata is multiplied by k.
SampleTrace thin(const SampleTrace& trace, std::size_t k);

struct RiskDecomposition {
  double bias = 0.0;
  /// Sample variance (n - 1 normalization).
  double variance = 0.0;
  /// bias^2 + variance
  double risk = 0.0;
  /// Variance with 1/n normalization; bias^2 + variance_n == mse.
  double variance_n = 0.0;
  /// Mean squared deviation from the ground truth.
  double mse = 0.0;
};

/// Needs at least two estimates.
RiskDecomposition risk_decomposition(std::span<const double> estimates, double ground_truth);

struct DiagnosticsReport {
  std::vector<double> A;
  std::vector<double> gamma;
  double tau = 0.5;
  double ess = 0.0;
  double phi_hat = 0.0;
  double phi_hat_weighted = 0.0;
  std::optional<RiskDecomposition> risk;
};

/// Autocovariances up to the truncation lag, ACT, ESS and both posterior
/// averages of phi over the trace.
DiagnosticsReport diagnose(const SampleTrace& trace, const TestFunctional& phi);

}  // namespace psgld
