// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "finite_diff.hpp"
#include "psgld/errors.hpp"
#include "psgld/models.hpp"
#include "psgld/samplers.hpp"

namespace psgld {
namespace {

GradientEstimate scalar_grad(double g, std::size_t N = 1, std::size_t n = 1) {
  return GradientEstimate{{g}, n, N};
}

TEST(Preconditioner, ZeroGradientHitsFloor) {
  PreconditionerState s(2);
  const auto up = precond_update(s, GradientEstimate{{0.0, 0.0}, 1, 1});
  EXPECT_EQ(up.V, (ParamVector{0.0, 0.0}));
  EXPECT_DOUBLE_EQ(up.G_diag[0], 1e5);
  EXPECT_DOUBLE_EQ(up.G_diag[1], 1e5);
}

TEST(Preconditioner, FirstUpdateFromZero) {
  PreconditionerState s(2);
  const auto up = precond_update(s, GradientEstimate{{1.0, 2.0}, 1, 1});
  EXPECT_NEAR(up.V[0], 0.01, 1e-15);
  EXPECT_NEAR(up.V[1], 0.04, 1e-15);
  EXPECT_NEAR(up.G_diag[0], 9.999000099989997, 1e-12);
  EXPECT_NEAR(up.G_diag[1], 4.999750012499373, 1e-12);
}

TEST(Preconditioner, ConstantGradientConverges) {
  PreconditionerState s(1);
  std::vector<double> G(1);
  for (int t = 0; t < 5000; ++t) precond_update(s, std::vector<double>{-3.0}, G);
  EXPECT_NEAR(s.V[0], 9.0, 1e-12);
  EXPECT_NEAR(G[0], 1.0 / (1e-5 + 3.0), 1e-12);
}

TEST(Preconditioner, PureAndInPlaceAgree) {
  PreconditionerState a(3), b(3);
  a.V = b.V = {0.5, 0.0, 2.0};
  const GradientEstimate g{{0.3, -1.0, 4.0}, 1, 1};
  const auto up = precond_update(a, g);
  std::vector<double> G(3);
  precond_update(b, g.g_bar, G);
  EXPECT_EQ(up.V, b.V);
  EXPECT_EQ(up.G_diag, G);
}

TEST(Preconditioner, RejectsBadState) {
  PreconditionerState s(1);
  s.alpha = 1.5;
  EXPECT_THROW(s.validate(), ConfigError);
  s.alpha = 0.99;
  s.lambda = 0.0;
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(GammaTerm, ZeroGradientGivesZero) {
  PreconditionerState s(2);
  s.V = {0.04, 0.0};
  const auto gam = gamma_term(s, GradientEstimate{{0.0, 0.0}, 1, 1}, std::vector<double>{-1.0, -1.0});
  EXPECT_EQ(gam, (ParamVector{0.0, 0.0}));
}

TEST(GammaTerm, ClosedFormValue) {
  PreconditionerState s(1);
  s.V = {0.04};
  const auto gam = gamma_term(s, scalar_grad(0.2), std::vector<double>{-1.0});
  EXPECT_NEAR(gam[0], 0.24997500187487515, 1e-12);
  // Finite differences of G_ii through V' (tests/support/oracles.py).
  EXPECT_NEAR(gam[0], 0.24997500203127743, 1e-8);
}

TEST(GammaTerm, MatchesFiniteDifferencesOnBlr) {
  auto data = std::make_shared<const Dataset>(
      Dataset::dense("d", 3, {1.0, -0.5, 0.2, 0.3, 0.8, -1.0, -0.7, 0.1, 0.4}, {1, -1, 1}));
  LogisticRegression m(data, PriorConfig{1.0});
  const ParamVector theta{0.3, -0.2, 0.5};
  const Minibatch batch = m.full_batch();
  PreconditionerState before(3);
  before.V = {0.02, 0.5, 0.001};
  const GradientEstimate g = m.minibatch_grad(theta, batch);
  PreconditionerState after = before;
  after.V = precond_update(before, g).V;
  const auto gam = gamma_term(after, g, m.diag_hessian(theta, batch));
  const auto fd = testing::fd_gamma(m, theta, batch, before);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_LT(testing::rel_err(gam[i], fd[i]), 1e-6) << i;
}

TEST(SgdStep, Examples) {
  EXPECT_EQ(sgd_step(std::vector<double>{1.5}, std::vector<double>{0.0}, scalar_grad(0.0), 0.1),
            (ParamVector{1.5}));
  EXPECT_NEAR(sgd_step(std::vector<double>{0.0}, std::vector<double>{0.0}, scalar_grad(2.0), 0.1)[0],
              0.2, 1e-15);
  const auto out = sgd_step(std::vector<double>{0.0, 0.0}, std::vector<double>{0.0, 0.0},
                            GradientEstimate{{0.01, 0.01}, 10, 100}, 1.0);
  EXPECT_NEAR(out[0], 1.0, 1e-12);
  EXPECT_NEAR(out[1], 1.0, 1e-12);
}

TEST(SgdStep, RejectsBadInputs) {
  EXPECT_THROW(sgd_step(std::vector<double>{0.0}, std::vector<double>{0.0}, scalar_grad(1.0), 0.0),
               ConfigError);
  EXPECT_THROW(sgd_step(std::vector<double>{0.0, 1.0}, std::vector<double>{0.0}, scalar_grad(1.0), 0.1),
               DatasetError);
  EXPECT_THROW(sgd_step(std::vector<double>{0.0}, std::vector<double>{0.0}, scalar_grad(1e308, 1e10), 1.0),
               DivergenceError);
}

TEST(SgldStep, Examples) {
  const std::vector<double> z0{0.0}, z1{1.0};
  EXPECT_EQ(sgld_step(std::vector<double>{0.7}, std::vector<double>{0.0}, scalar_grad(0.0), 0.1, z0),
            (ParamVector{0.7}));
  EXPECT_NEAR(sgld_step(std::vector<double>{0.0}, std::vector<double>{0.0}, scalar_grad(2.0), 0.1, z1)[0],
              0.416227766016838, 1e-12);
}

TEST(SgldStep, NoiseVarianceIsEps) {
  Rng rng(11);
  const double eps = 0.04;
  double s = 0.0, ss = 0.0;
  const int n = 20000;
  for (int k = 0; k < n; ++k) {
    const double v = sgld_step(std::vector<double>{0.0}, std::vector<double>{0.0}, scalar_grad(0.0), eps, rng)[0];
    s += v;
    ss += v * v;
  }
  const double var = ss / n - (s / n) * (s / n);
  EXPECT_NEAR(var / eps, 1.0, 0.05);
}

TEST(PsgldStep, ScalarExample) {
  PreconditionerState s(1);
  const auto up = precond_update(s, scalar_grad(2.0));
  EXPECT_NEAR(up.V[0], 0.04, 1e-15);
  EXPECT_NEAR(up.G_diag[0], 4.999750012499373, 1e-12);
  const auto out = psgld_step(std::vector<double>{0.0}, std::vector<double>{0.0}, scalar_grad(2.0),
                              up.G_diag, 0.1, {}, std::vector<double>{1.0});
  EXPECT_NEAR(out[0], 1.2070641054298399, 1e-12);
}

TEST(PsgldStep, IdentityPreconditionerIsSgld) {
  const std::vector<double> theta{0.3, -1.2}, prior{-0.3, 1.2}, z{0.5, -2.0}, G{1.0, 1.0};
  const GradientEstimate g{{0.7, 0.1}, 5, 50};
  EXPECT_EQ(psgld_step(theta, prior, g, G, 0.01, {}, z), sgld_step(theta, prior, g, 0.01, z));
}

TEST(PsgldStep, GammaEntersHalfStepDrift) {
  const std::vector<double> theta{0.0}, prior{0.0}, z{0.0}, G{2.0}, gam{0.4};
  const auto out = psgld_step(theta, prior, scalar_grad(0.0), G, 0.1, gam, z);
  EXPECT_NEAR(out[0], 0.05 * 0.4, 1e-15);
}

TEST(PsgldStep, NoiseCovarianceFollowsG) {
  Rng rng(5);
  const std::vector<double> theta{0.0, 0.0}, prior{0.0, 0.0}, G{4.0, 0.25};
  const GradientEstimate g{{0.0, 0.0}, 1, 1};
  const double eps = 0.01;
  double ss0 = 0.0, ss1 = 0.0;
  const int n = 10000;
  for (int k = 0; k < n; ++k) {
    const auto v = psgld_step(theta, prior, g, G, eps, {}, rng);
    ss0 += v[0] * v[0];
    ss1 += v[1] * v[1];
  }
  EXPECT_NEAR(ss0 / n / (eps * 4.0), 1.0, 0.05);
  EXPECT_NEAR(ss1 / n / (eps * 0.25), 1.0, 0.05);
}

TEST(RmspropStep, Examples) {
  EXPECT_EQ(rmsprop_step(std::vector<double>{2.0}, std::vector<double>{0.0}, scalar_grad(0.0),
                         std::vector<double>{3.0}, 0.1),
            (ParamVector{2.0}));
  PreconditionerState s(1);
  const auto up = precond_update(s, scalar_grad(2.0));
  EXPECT_NEAR(rmsprop_step(std::vector<double>{0.0}, std::vector<double>{0.0}, scalar_grad(2.0), up.G_diag, 0.1)[0],
              0.9999500024998746, 1e-12);
  const std::vector<double> theta{0.3, -1.0}, prior{0.1, 0.2}, ones{1.0, 1.0};
  const GradientEstimate g{{0.5, -0.25}, 2, 8};
  EXPECT_EQ(rmsprop_step(theta, prior, g, ones, 0.05), sgd_step(theta, prior, g, 0.05));
}

TEST(Algorithms, NamesRoundTrip) {
  for (Algorithm a : {Algorithm::SGLD, Algorithm::pSGLD, Algorithm::SGD, Algorithm::RMSprop})
    EXPECT_EQ(parse_algorithm(to_string(a)), a);
  EXPECT_EQ(parse_algorithm("psgld"), Algorithm::pSGLD);
  EXPECT_THROW(parse_algorithm("adam"), ConfigError);
  EXPECT_TRUE(is_langevin(Algorithm::SGLD));
  EXPECT_FALSE(is_langevin(Algorithm::RMSprop));
  EXPECT_EQ(parse_eps_units("per_datum"), EpsUnits::PerDatum);
  EXPECT_THROW(parse_eps_units("per_batch"), ConfigError);
  EXPECT_DOUBLE_EQ(absolute_step_factor(EpsUnits::Absolute, 100), 1.0);
  EXPECT_DOUBLE_EQ(absolute_step_factor(EpsUnits::PerDatum, 100), 0.01);
}

class RunChainTest : public ::testing::Test {
 protected:
  GaussianTarget target{{0.0, 0.0}, {0.16, 1.0}};
};

TEST_F(RunChainTest, RecordsPostBurnInMultiples) {
  SamplerConfig c;
  c.algorithm = Algorithm::SGLD;
  c.schedule = StepSchedule::constant(0.01);
  c.total_iters = 1000;
  c.burn_in = 300;
  c.thinning = 100;
  std::vector<std::size_t> at;
  ChainObserver obs;
  obs.on_sample = [&](std::size_t t, const Sample&) { at.push_back(t); };
  const auto tr = run_chain(target, c, obs);
  EXPECT_EQ(tr.size(), 7u);
  EXPECT_EQ(at, (std::vector<std::size_t>{400, 500, 600, 700, 800, 900, 1000}));
  EXPECT_NEAR(tr.S_T, 700 * 0.01, 1e-12);
}

TEST_F(RunChainTest, SameSeedSameTrace) {
  for (Algorithm a : {Algorithm::SGLD, Algorithm::pSGLD, Algorithm::SGD, Algorithm::RMSprop}) {
    SamplerConfig c;
    c.algorithm = a;
    c.schedule = StepSchedule::constant(0.05);
    c.total_iters = 500;
    c.seed = 42;
    EXPECT_EQ(run_chain(target, c), run_chain(target, c)) << to_string(a);
    SamplerConfig d = c;
    d.seed = 43;
    if (is_langevin(a)) EXPECT_NE(run_chain(target, c), run_chain(target, d));
  }
}

TEST_F(RunChainTest, SgdConvergesToMode) {
  SamplerConfig c;
  c.algorithm = Algorithm::SGD;
  c.schedule = StepSchedule::constant(0.05);
  c.total_iters = 2000;
  c.initial_theta = ParamVector{1.0, -2.0};
  const auto tr = run_chain(target, c);
  EXPECT_NEAR(tr.samples.back().theta[0], 0.0, 1e-10);
  EXPECT_NEAR(tr.samples.back().theta[1], 0.0, 1e-10);
}

TEST_F(RunChainTest, MatchesManualSteps) {
  // Gaussian target has N = n = 1, so the chain is just repeated steps.
  SamplerConfig c;
  c.algorithm = Algorithm::pSGLD;
  c.schedule = StepSchedule::constant(0.1);
  c.total_iters = 3;
  c.initial_theta = ParamVector{0.5, -0.5};
  c.seed = 9;
  const auto tr = run_chain(target, c);
  Rng noise(Rng::derive_seed(9, 2));
  PreconditionerState st(2);
  ParamVector theta = *c.initial_theta;
  std::vector<double> G(2);
  for (int t = 0; t < 3; ++t) {
    const auto g = target.minibatch_grad(theta, target.full_batch());
    precond_update(st, g.g_bar, G);
    theta = psgld_step(theta, target.prior_grad(theta), g, G, 0.1, {}, noise);
  }
  EXPECT_EQ(tr.samples.back().theta, theta);
}

TEST_F(RunChainTest, PerDatumScalesStep) {
  auto data = std::make_shared<const Dataset>(
      Dataset::dense("d", 1, {1.0, -1.0, 0.5, 2.0}, {1, -1, 1, 1}));
  LogisticRegression m(data, PriorConfig{1.0});
  SamplerConfig a;
  a.algorithm = Algorithm::SGD;
  a.total_iters = 5;
  a.minibatch_size = 2;
  a.initial_theta = ParamVector{0.1};
  a.schedule = StepSchedule::constant(0.2);
  a.eps_units = EpsUnits::PerDatum;
  SamplerConfig b = a;
  b.schedule = StepSchedule::constant(0.05);
  b.eps_units = EpsUnits::Absolute;
  EXPECT_EQ(run_chain(m, a).samples.back().theta, run_chain(m, b).samples.back().theta);
}

TEST_F(RunChainTest, ValidationErrors) {
  SamplerConfig c;
  c.total_iters = 10;
  c.burn_in = 10;
  EXPECT_THROW(run_chain(target, c), ConfigError);
  c.burn_in = 0;
  c.algorithm = Algorithm::SGLD;
  c.gamma_term = true;
  EXPECT_THROW(run_chain(target, c), ConfigError);
  c.gamma_term = false;
  c.minibatch_size = 2;
  EXPECT_THROW(run_chain(target, c), ConfigError);

  auto data = std::make_shared<const Dataset>(Dataset::dense("d", 2, {0.1, 0.2, 0.3, 0.4}, {0, 1}));
  MlpModel mlp({2, 3, 2}, PriorConfig{1.0}, data);
  SamplerConfig g;
  g.algorithm = Algorithm::pSGLD;
  g.gamma_term = true;
  g.total_iters = 5;
  EXPECT_THROW(run_chain(mlp, g), ConfigError);
}

TEST_F(RunChainTest, DivergenceReportsIteration) {
  SamplerConfig c;
  c.algorithm = Algorithm::SGD;
  c.schedule = StepSchedule::constant(1e3);
  c.total_iters = 1000;
  c.initial_theta = ParamVector{1.0, 1.0};
  try {
    run_chain(target, c);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_GT(e.iteration(), 0u);
    EXPECT_TRUE(std::isfinite(e.last_finite_norm()));
  }
}

TEST_F(RunChainTest, LabelsGammaAndUnits) {
  SamplerConfig c;
  c.algorithm = Algorithm::pSGLD;
  c.gamma_term = true;
  c.total_iters = 3;
  c.eps_units = EpsUnits::PerDatum;
  const auto tr = run_chain(target, c);
  EXPECT_EQ(tr.algorithm, "pSGLD+gamma");
  EXPECT_NE(tr.schedule.find("per_datum"), std::string::npos);
}

}  // namespace
}  // namespace psgld
