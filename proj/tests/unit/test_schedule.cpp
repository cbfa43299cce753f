// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "psgld/errors.hpp"
#include "psgld/schedule.hpp"

namespace psgld {
namespace {

TEST(Schedule, Polynomial) {
  const auto s = StepSchedule::polynomial(1.0, 0.0, 1.0);
  EXPECT_DOUBLE_EQ(s.at(4), 0.25);
  EXPECT_DOUBLE_EQ(step_size(s, 1), 1.0);
  const auto p = StepSchedule::polynomial(0.5, 3.0, 0.75);
  EXPECT_DOUBLE_EQ(p.at(13), 0.5 * std::pow(16.0, -0.75));
  for (std::size_t t = 1; t < 100; ++t) EXPECT_LT(p.at(t + 1), p.at(t));
  EXPECT_TRUE(p.is_robbins_monro());
  EXPECT_FALSE(p.warning().has_value());
}

TEST(Schedule, BlockDecay) {
  const auto s = StepSchedule::block_decay(5e-4, 20, 600);
  EXPECT_EQ(s.at(1), 5e-4);
  EXPECT_EQ(s.at(12000), 5e-4);
  EXPECT_EQ(s.at(12001), 2.5e-4);
  EXPECT_EQ(s.at(24001), 1.25e-4);
  EXPECT_FALSE(s.is_robbins_monro());
  ASSERT_TRUE(s.warning().has_value());
  EXPECT_NE(s.warning()->find("block_decay"), std::string::npos);
}

TEST(Schedule, ConstantIsFlagged) {
  const auto s = StepSchedule::constant(0.1);
  EXPECT_EQ(s.at(1), 0.1);
  EXPECT_EQ(s.at(1000000), 0.1);
  EXPECT_TRUE(s.warning().has_value());
  EXPECT_EQ(s.describe(), "constant(eps=0.1)");
}

TEST(Schedule, Scaled) {
  const auto p = StepSchedule::polynomial(2.0, 1.0, 0.6).scaled(0.5);
  EXPECT_DOUBLE_EQ(p.at(3), std::pow(4.0, -0.6));
  EXPECT_DOUBLE_EQ(StepSchedule::constant(0.3).scaled(0.1).at(5), 0.3 * 0.1);
  EXPECT_THROW(StepSchedule::constant(0.3).scaled(0.0), ConfigError);
}

TEST(Schedule, Describe) {
  EXPECT_EQ(StepSchedule::polynomial(1.0, 0.0, 1.0).describe(), "polynomial(a=1,b=0,gamma=1)");
  EXPECT_EQ(StepSchedule::block_decay(5e-4, 2, 80).describe(),
            "block_decay(eps0=5e-04,L_epochs=2,epoch_len=80)");
}

TEST(Schedule, Validation) {
  EXPECT_THROW(StepSchedule::polynomial(1.0, 0.0, 0.5), ConfigError);
  EXPECT_THROW(StepSchedule::polynomial(1.0, 0.0, 1.1), ConfigError);
  EXPECT_THROW(StepSchedule::polynomial(0.0, 0.0, 1.0), ConfigError);
  EXPECT_THROW(StepSchedule::polynomial(1.0, -1.0, 1.0), ConfigError);
  EXPECT_THROW(StepSchedule::block_decay(1e-3, 0, 10), ConfigError);
  EXPECT_THROW(StepSchedule::block_decay(1e-3, 1, 0), ConfigError);
  EXPECT_THROW(StepSchedule::constant(-1.0), ConfigError);
  EXPECT_THROW(StepSchedule::constant(std::nan("")), ConfigError);
  EXPECT_THROW(StepSchedule::constant(0.1).at(0), ConfigError);
}

}  // namespace
}  // namespace psgld
