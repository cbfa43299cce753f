// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>

namespace psgld {

enum class ScheduleKind { Polynomial, BlockDecay, Constant };

/// Step-size sequence eps_t, t = 1, 2, ...
///
///   polynomial   a * (b + t)^-gamma, gamma in (0.5, 1]
///   block_decay  eps0 * 2^-floor((t - 1) / (L_epochs * epoch_len))
///   constant     eps0
///
/// Only polynomial schedules satisfy the Robbins-Monro conditions
/// (sum eps_t = inf, sum eps_t^2 < inf). The other two are accepted but
/// flagged by warning().
struct StepSchedule {
  ScheduleKind kind = ScheduleKind::Constant;
  double a = 0.0;
  double b = 0.0;
  double gamma = 1.0;
  double eps0 = 0.0;
  std::size_t L_epochs = 1;
  std::size_t epoch_len = 1;

  static StepSchedule polynomial(double a, double b, double gamma);
  static StepSchedule block_decay(double eps0, std::size_t L_epochs, std::size_t epoch_len);
  static StepSchedule constant(double eps);

  /// Throws ConfigError on invalid parameters.
  void validate() const;

  /// eps_t for t >= 1.
  double at(std::size_t t) const;

  /// Same schedule with every step multiplied by factor > 0.
  StepSchedule scaled(double factor) const;

  bool is_robbins_monro() const { return kind == ScheduleKind::Polynomial; }
  /// Human-readable warning for schedules whose step sizes do not sum to
  /// infinity with finite sum of squares, nullopt otherwise.
  std::optional<std::string> warning() const;

  /// Exact text form, e.g. "polynomial(a=1,b=0,gamma=1)".
  std::string describe() const;
};

double step_size(const StepSchedule& schedule, std::size_t t);

}  // namespace psgld
