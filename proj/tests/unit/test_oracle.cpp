// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "psgld/diagnostics.hpp"
#include "psgld/errors.hpp"
#include "psgld/models.hpp"
#include "psgld/oracle.hpp"

namespace psgld {
namespace {

const GaussianTarget kTarget{{0.0, 0.0}, {0.16, 1.0}};

TEST(MhChain, TinyProposalAcceptsAlmostAll) {
  MhConfig c;
  c.proposal_std = 1e-8;
  c.steps = 5000;
  c.initial_theta = ParamVector{0.1, -0.2};
  const auto r = mh_chain(kTarget, c);
  EXPECT_GT(r.acceptance_rate, 0.999);
  EXPECT_EQ(r.proposal_std, 1e-8);
}

TEST(MhChain, RecordsThinnedPostBurnIn) {
  MhConfig c;
  c.steps = 1000;
  c.burn_in = 100;
  c.thinning = 10;
  c.seed = 4;
  const auto r = mh_chain(kTarget, c);
  EXPECT_EQ(r.trace.size(), 90u);
  EXPECT_EQ(r.trace.dim, 2u);
  EXPECT_EQ(r.mean.size(), 2u);
}

TEST(MhChain, Deterministic) {
  MhConfig c;
  c.steps = 2000;
  c.seed = 11;
  EXPECT_EQ(mh_chain(kTarget, c).trace, mh_chain(kTarget, c).trace);
}

TEST(MhChain, GaussianMomentsMatch) {
  MhConfig c;
  c.seed = 21;
  c.initial_theta = ParamVector{0.0, 0.0};
  c = tune_proposal(kTarget, c);
  c.steps = 2000000;
  c.burn_in = 10000;
  c.thinning = 5;
  const auto r = mh_chain(kTarget, c);
  EXPECT_GE(r.acceptance_rate, 0.2);
  EXPECT_LE(r.acceptance_rate, 0.5);
  const auto cov = sample_covariance(r.trace);
  EXPECT_NEAR(cov[0], 0.16, 0.02 * 0.16);
  EXPECT_NEAR(cov[3], 1.0, 0.02 * 1.0);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto v = r.trace.coordinate(i);
    EXPECT_LT(std::abs(posterior_average(r.trace, TestFunctional::coordinate(i), false)),
              3.0 * mc_standard_error(v));
  }
}

TEST(MhChain, ConfigErrors) {
  MhConfig c;
  c.proposal_std = 0.0;
  EXPECT_THROW(mh_chain(kTarget, c), ConfigError);
  c = MhConfig{};
  c.steps = 10;
  c.burn_in = 10;
  EXPECT_THROW(mh_chain(kTarget, c), ConfigError);
  c = MhConfig{};
  c.proposal_scales = {1.0};
  EXPECT_THROW(mh_chain(kTarget, c), ConfigError);
  c = MhConfig{};
  c.initial_theta = ParamVector{1.0};
  EXPECT_THROW(mh_chain(kTarget, c), ConfigError);
}

TEST(TuneProposal, LandsInWindow) {
  MhConfig c;
  c.proposal_std = 50.0;
  c.seed = 3;
  c.initial_theta = ParamVector{0.0, 0.0};
  const auto tuned = tune_proposal(kTarget, c, 4000);
  c = tuned;
  c.steps = 4000;
  c.seed = Rng::derive_seed(3, 7);
  const auto r = mh_chain(kTarget, c);
  EXPECT_LT(tuned.proposal_std, 50.0);
  EXPECT_GT(r.acceptance_rate, 0.15);
  EXPECT_LT(r.acceptance_rate, 0.55);
}

TEST(GridExpectation, GaussianMoments) {
  const std::vector<std::pair<double, double>> b{{-1.6, 1.6}, {-4.0, 4.0}};
  EXPECT_NEAR(grid_expectation(kTarget, b, 400, TestFunctional::coordinate(0)), 0.0, 1e-12);
  // Reference value from a numpy trapezoid rule on the same grid.
  EXPECT_NEAR(grid_expectation(kTarget, b, 400, TestFunctional::coordinate_square(0)),
              0.159829, 1e-6);
  const std::vector<std::pair<double, double>> wide{{-2.4, 2.4}, {-6.0, 6.0}};
  EXPECT_NEAR(grid_expectation(kTarget, wide, 800, TestFunctional::coordinate_square(0)), 0.16,
              1e-3);
  const TestFunctional c{"c", [](std::span<const double>) { return -2.5; }};
  EXPECT_NEAR(grid_expectation(kTarget, b, 50, c), -2.5, 1e-12);
}

TEST(GridExpectation, Errors) {
  const GaussianTarget three{{0, 0, 0}, {1, 1, 1}};
  EXPECT_THROW(grid_expectation(three, {{-1, 1}, {-1, 1}, {-1, 1}}, 10,
                                TestFunctional::coordinate(0)),
               ConfigError);
  EXPECT_THROW(grid_expectation(kTarget, {{-1, 1}}, 10, TestFunctional::coordinate(0)),
               ConfigError);
  EXPECT_THROW(grid_expectation(kTarget, {{1, -1}, {-1, 1}}, 10, TestFunctional::coordinate(0)),
               ConfigError);
  EXPECT_THROW(grid_expectation(kTarget, {{-1, 1}, {-1, 1}}, 1, TestFunctional::coordinate(0)),
               ConfigError);
}

}  // namespace
}  // namespace psgld
