// SPDX-License-Identifier: Apache-2.0
#include "psgld/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "psgld/errors.hpp"

namespace psgld {
namespace {

struct GeyerResult {
  double tau = 0.5;
  std::size_t last_lag = 0;  // highest lag that entered the sum
};

// lag(t) returns the autocorrelation gamma(t); max_lag is the largest lag
// available.
template <typename LagFn>
GeyerResult geyer(LagFn&& lag, std::size_t max_lag) {
  GeyerResult r;
  double sum = 0.0;  // sum of gamma(1..2K-1)
  for (std::size_t k = 0; 2 * k + 1 <= max_lag; ++k) {
    const double g0 = k == 0 ? 1.0 : lag(2 * k);
    const double g1 = lag(2 * k + 1);
    if (g0 + g1 <= 0.0) break;
    if (k > 0) sum += g0;
    sum += g1;
    r.last_lag = 2 * k + 1;
  }
  r.tau = std::max(0.5, 0.5 + sum);
  return r;
}

std::vector<double> deviations(std::span<const double> v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  std::vector<double> d(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) d[i] = v[i] - mean;
  return d;
}

double lag_cov(const std::vector<double>& d, std::size_t t) {
  const std::size_t T = d.size();
  double s = 0.0;
  for (std::size_t i = 0; i + t < T; ++i) s += d[i] * d[i + t];
  return s / static_cast<double>(T - t);
}

void require_samples(std::size_t n, std::size_t need) {
  if (n < need)
    throw DegenerateTraceError("insufficient samples: need at least " + std::to_string(need) +
                               ", have " + std::to_string(n));
}

std::vector<double> phi_values(const SampleTrace& trace, const TestFunctional& phi) {
  std::vector<double> v(trace.size());
  for (std::size_t k = 0; k < trace.size(); ++k) v[k] = phi.eval(trace.samples[k].theta);
  return v;
}

}  // namespace

TestFunctional TestFunctional::coordinate(std::size_t i) {
  return {"theta" + std::to_string(i), [i](std::span<const double> t) { return t[i]; }};
}

TestFunctional TestFunctional::coordinate_square(std::size_t i) {
  return {"theta" + std::to_string(i) + "^2",
          [i](std::span<const double> t) { return t[i] * t[i]; }};
}

std::vector<double> autocovariance(std::span<const double> values, std::size_t max_lag) {
  require_samples(values.size(), 2);
  if (max_lag >= values.size())
    throw ConfigError("max_lag must be smaller than the series length");
  const std::vector<double> d = deviations(values);
  std::vector<double> A(max_lag + 1);
  for (std::size_t t = 0; t <= max_lag; ++t) A[t] = lag_cov(d, t);
  return A;
}

double act(std::span<const double> A) {
  if (A.empty() || !(A[0] > 0.0))
    throw DegenerateTraceError("degenerate trace: zero variance, ACT undefined");
  const double a0 = A[0];
  return geyer([&](std::size_t t) { return A[t] / a0; }, A.size() - 1).tau;
}

double act_of(std::span<const double> values) {
  require_samples(values.size(), 2);
  const std::vector<double> d = deviations(values);
  const double a0 = lag_cov(d, 0);
  if (!(a0 > 0.0)) throw DegenerateTraceError("degenerate trace: zero variance, ACT undefined");
  return geyer([&](std::size_t t) { return lag_cov(d, t) / a0; }, values.size() - 1).tau;
}

double ess(std::size_t T, double tau) {
  if (!(tau >= 0.5)) throw ConfigError("tau must be >= 0.5");
  return static_cast<double>(T) / (2.0 * tau);
}

double ess_of(std::span<const double> values) { return ess(values.size(), act_of(values)); }

double mc_standard_error(std::span<const double> values) {
  require_samples(values.size(), 2);
  const std::vector<double> d = deviations(values);
  const double a0 = lag_cov(d, 0);
  if (!(a0 > 0.0)) return 0.0;
  const double tau =
      geyer([&](std::size_t t) { return lag_cov(d, t) / a0; }, values.size() - 1).tau;
  return std::sqrt(a0 / ess(values.size(), tau));
}

double min_ess(const SampleTrace& trace) {
  require_samples(trace.size(), 2);
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < trace.dim; ++i) m = std::min(m, ess_of(trace.coordinate(i)));
  return m;
}

double posterior_average(const SampleTrace& trace, const TestFunctional& phi, bool weighted) {
  if (trace.empty()) throw DegenerateTraceError("empty trace");
  double num = 0.0, den = 0.0;
  for (const Sample& s : trace.samples) {
    const double w = weighted ? s.eps : 1.0;
    num += w * phi.eval(s.theta);
    den += w;
  }
  return num / den;
}

ParamVector posterior_mean(const SampleTrace& trace, bool weighted) {
  if (trace.empty()) throw DegenerateTraceError("empty trace");
  ParamVector m(trace.dim, 0.0);
  double den = 0.0;
  for (const Sample& s : trace.samples) {
    const double w = weighted ? s.eps : 1.0;
    for (std::size_t i = 0; i < trace.dim; ++i) m[i] += w * s.theta[i];
    den += w;
  }
  for (double& v : m) v /= den;
  return m;
}

std::vector<double> sample_covariance(const SampleTrace& trace) {
  require_samples(trace.size(), 2);
  const std::size_t D = trace.dim;
  const ParamVector mu = posterior_mean(trace, false);
  std::vector<double> c(D * D, 0.0);
  for (const Sample& s : trace.samples)
    for (std::size_t i = 0; i < D; ++i)
      for (std::size_t j = 0; j < D; ++j) c[i * D + j] += (s.theta[i] - mu[i]) * (s.theta[j] - mu[j]);
  for (double& v : c) v /= static_cast<double>(trace.size());
  return c;
}

double covariance_error(const SampleTrace& trace, std::span<const double> true_cov) {
  if (true_cov.size() != trace.dim * trace.dim)
    throw DatasetError("covariance_error: true covariance must be D x D");
  const std::vector<double> c = sample_covariance(trace);
  double s = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) s += (c[k] - true_cov[k]) * (c[k] - true_cov[k]);
  return std::sqrt(s);
}

PredictiveEnsemble::PredictiveEnsemble(const Classifier& model, const Dataset& inputs)
    : model_(model), inputs_(inputs), sum_(inputs.rows() * model.num_classes(), 0.0) {}

void PredictiveEnsemble::add(std::span<const double> theta) {
  const std::vector<double> p = model_.predict_proba(theta, inputs_);
  for (std::size_t k = 0; k < p.size(); ++k) sum_[k] += p[k];
  ++count_;
}

std::vector<double> PredictiveEnsemble::mean() const {
  if (count_ == 0) throw DegenerateTraceError("empty ensemble");
  std::vector<double> m = sum_;
  for (double& v : m) v /= static_cast<double>(count_);
  return m;
}

double PredictiveEnsemble::test_error() const {
  return psgld::test_error(mean(), model_, inputs_);
}

std::vector<double> predictive_estimate(const SampleTrace& trace, const Classifier& model,
                                        const Dataset& inputs) {
  if (trace.empty()) throw DegenerateTraceError("empty trace");
  if (trace.dim != model.dim()) throw DatasetError("trace dimension does not match model");
  PredictiveEnsemble e(model, inputs);
  for (const Sample& s : trace.samples) e.add(s.theta);
  return e.mean();
}

std::vector<double> predictive_estimate(const SampleTrace& trace, const Classifier& model,
                                        std::span<const double> x) {
  const Dataset one = Dataset::dense("x", x.size(), std::vector<double>(x.begin(), x.end()), {0});
  return predictive_estimate(trace, model, one);
}

double test_error(std::span<const double> probs, const Classifier& model, const Dataset& test) {
  if (test.rows() == 0) throw DatasetError("empty test set");
  const std::size_t K = model.num_classes();
  if (probs.size() != test.rows() * K) throw DatasetError("test_error: probability shape mismatch");
  std::size_t wrong = 0;
  for (std::size_t r = 0; r < test.rows(); ++r) {
    const auto row = probs.subspan(r * K, K);
    // max_element returns the first maximum, so ties go to the lowest class.
    const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    if (best != model.class_of(test.label(r))) ++wrong;
  }
  return 100.0 * static_cast<double>(wrong) / static_cast<double>(test.rows());
}

double test_error(const SampleTrace& trace, const Classifier& model, const Dataset& test) {
  return test_error(predictive_estimate(trace, model, test), model, test);
}

SampleTrace thin(const SampleTrace& trace, std::size_t k) {
  if (k < 1) throw ConfigError("thinning factor must be >= 1");
  SampleTrace out = trace;
  out.samples.clear();
  for (std::size_t i = 0; i < trace.size(); i += k) out.samples.push_back(trace.samples[i]);
  out.thinning = trace.thinning * k;
  return out;
}

RiskDecomposition risk_decomposition(std::span<const double> estimates, double ground_truth) {
  require_samples(estimates.size(), 2);
  const double n = static_cast<double>(estimates.size());
  double mean = 0.0;
  for (double e : estimates) mean += e;
  mean /= n;
  double ss = 0.0, sq = 0.0;
  for (double e : estimates) {
    ss += (e - mean) * (e - mean);
    sq += (e - ground_truth) * (e - ground_truth);
  }
  RiskDecomposition r;
  r.bias = mean - ground_truth;
  r.variance = ss / (n - 1.0);
  r.variance_n = ss / n;
  r.risk = r.bias * r.bias + r.variance;
  r.mse = sq / n;
  return r;
}

DiagnosticsReport diagnose(const SampleTrace& trace, const TestFunctional& phi) {
  require_samples(trace.size(), 2);
  const std::vector<double> v = phi_values(trace, phi);
  const std::vector<double> d = deviations(v);
  DiagnosticsReport rep;
  const double a0 = lag_cov(d, 0);
  if (!(a0 > 0.0)) throw DegenerateTraceError("degenerate trace: zero variance, ACT undefined");
  const GeyerResult g =
      geyer([&](std::size_t t) { return lag_cov(d, t) / a0; }, v.size() - 1);
  rep.tau = g.tau;
  rep.ess = ess(v.size(), g.tau);
  const std::size_t lags = std::min(v.size() - 1, g.last_lag + 1);
  rep.A.resize(lags + 1);
  rep.gamma.resize(lags + 1);
  for (std::size_t t = 0; t <= lags; ++t) {
    rep.A[t] = lag_cov(d, t);
    rep.gamma[t] = rep.A[t] / a0;
  }
  rep.phi_hat = posterior_average(trace, phi, false);
  rep.phi_hat_weighted = posterior_average(trace, phi, true);
  return rep;
}

}  // namespace psgld
