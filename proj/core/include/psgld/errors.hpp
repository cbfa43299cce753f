// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace psgld {

// Runtime failures (exit code 1 at the CLI boundary).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user configuration (exit code 2 at the CLI boundary).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class DatasetError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DatasetError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : DatasetError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Requested capability is not implemented by the model (e.g. the MLP has no
// analytic diagonal Hessian).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t iteration, double last_finite_norm)
      : Error("chain diverged at iteration " + std::to_string(iteration) +
              " (last finite |theta| = " + std::to_string(last_finite_norm) + ")"),
        iteration_(iteration),
        last_finite_norm_(last_finite_norm) {}

  std::size_t iteration() const noexcept { return iteration_; }
  double last_finite_norm() const noexcept { return last_finite_norm_; }

 private:
  std::size_t iteration_;
  double last_finite_norm_;
};

// Trace statistics that are undefined for the given samples (constant series,
// too few samples, empty trace).
class DegenerateTraceError : public Error {
 public:
  using Error::Error;
};

}  // namespace psgld
