// SPDX-License-Identifier: Apache-2.0
#include "psgld/schedule.hpp"

#include <cmath>

#include "psgld/errors.hpp"
#include "psgld/numfmt.hpp"

namespace psgld {

StepSchedule StepSchedule::polynomial(double a, double b, double gamma) {
  StepSchedule s;
  s.kind = ScheduleKind::Polynomial;
  s.a = a;
  s.b = b;
  s.gamma = gamma;
  s.validate();
  return s;
}

StepSchedule StepSchedule::block_decay(double eps0, std::size_t L_epochs, std::size_t epoch_len) {
  StepSchedule s;
  s.kind = ScheduleKind::BlockDecay;
  s.eps0 = eps0;
  s.L_epochs = L_epochs;
  s.epoch_len = epoch_len;
  s.validate();
  return s;
}

StepSchedule StepSchedule::constant(double eps) {
  StepSchedule s;
  s.kind = ScheduleKind::Constant;
  s.eps0 = eps;
  s.validate();
  return s;
}

void StepSchedule::validate() const {
  switch (kind) {
    case ScheduleKind::Polynomial:
      if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("schedule: a must be positive");
      if (!(b >= 0.0) || !std::isfinite(b)) throw ConfigError("schedule: b must be nonnegative");
      if (!(gamma > 0.5 && gamma <= 1.0))
        throw ConfigError("schedule: gamma must lie in (0.5, 1]");
      break;
    case ScheduleKind::BlockDecay:
      if (!(eps0 > 0.0) || !std::isfinite(eps0)) throw ConfigError("schedule: eps0 must be positive");
      if (L_epochs < 1) throw ConfigError("schedule: L_epochs must be >= 1");
      if (epoch_len < 1) throw ConfigError("schedule: epoch_len must be >= 1");
      break;
    case ScheduleKind::Constant:
      if (!(eps0 > 0.0) || !std::isfinite(eps0)) throw ConfigError("schedule: eps must be positive");
      break;
  }
}

double StepSchedule::at(std::size_t t) const {
  if (t < 1) throw ConfigError("schedule: iterations are numbered from 1");
  switch (kind) {
    case ScheduleKind::Polynomial:
      return a * std::pow(b + static_cast<double>(t), -gamma);
    case ScheduleKind::BlockDecay: {
      const std::size_t halvings = (t - 1) / (L_epochs * epoch_len);
      return std::ldexp(eps0, -static_cast<int>(std::min<std::size_t>(halvings, 2000)));
    }
    case ScheduleKind::Constant:
      return eps0;
  }
  return eps0;
}

StepSchedule StepSchedule::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor))
    throw ConfigError("schedule: scale factor must be positive");
  StepSchedule s = *this;
  s.a *= factor;
  s.eps0 *= factor;
  return s;
}

std::optional<std::string> StepSchedule::warning() const {
  if (is_robbins_monro()) return std::nullopt;
  return describe() + " has a finite step-size sum; samples carry discretization bias";
}

std::string StepSchedule::describe() const {
  switch (kind) {
    case ScheduleKind::Polynomial:
      return "polynomial(a=" + format_double(a) + ",b=" + format_double(b) +
             ",gamma=" + format_double(gamma) + ")";
    case ScheduleKind::BlockDecay:
      return "block_decay(eps0=" + format_double(eps0) + ",L_epochs=" + std::to_string(L_epochs) +
             ",epoch_len=" + std::to_string(epoch_len) + ")";
    case ScheduleKind::Constant:
      return "constant(eps=" + format_double(eps0) + ")";
  }
  return {};
}

double step_size(const StepSchedule& schedule, std::size_t t) { return schedule.at(t); }

}  // namespace psgld
