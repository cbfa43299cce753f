// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include "psgld/data_io.hpp"
#include "psgld/dataset.hpp"
#include "psgld/diagnostics.hpp"
#include "psgld/model.hpp"
#include "psgld_app/output.hpp"

namespace psgld::app {

/// Shared inputs for every command.
struct Context {
  RunConfig config;
  std::uint64_t seed = 0;
  /// Root for dataset files named in experiment presets.
  std::filesystem::path data_dir;
  /// Progress lines; null for silence.
  std::ostream* log = nullptr;
};

/// $PSGLD_DATA_DIR, else the data/ directory of the source tree.
std::filesystem::path default_data_dir();

/// Sets key to value unless the config already has it.
void set_default(RunConfig& config, const std::string& key, const std::string& value);

struct BuiltModel {
  std::shared_ptr<const Dataset> train;
  std::shared_ptr<const Dataset> test;
  std::unique_ptr<Model> model;
};

/// Builds the model named by `model` (gaussian | blr | mlp) with its data.
BuiltModel build_model(const RunConfig& config);

/// SamplerConfig from the run config, with block-decay epoch length defaulted
/// to N / minibatch_size and init = zero honored.
SamplerConfig sampler_config_for(const RunConfig& config, const Model& model);

RunOutput cmd_sample(const Context& ctx);

struct DiagnoseOptions {
  std::filesystem::path trace;
  /// "coord:<i>" or "square:<i>".
  std::string functional = "coord:0";
  /// Row-major D x D covariance for the Frobenius error.
  std::optional<std::vector<double>> true_cov;
  /// Ground truth of the functional for bias / risk.
  std::optional<double> truth;
};

TestFunctional parse_functional(const std::string& spec);
RunOutput cmd_diagnose(const DiagnoseOptions& options);

RunOutput cmd_oracle(const Context& ctx);

/// name is one of sim2d, blr_australian, blr_a9a, fnn_small.
RunOutput cmd_experiment(const std::string& name, const Context& ctx);

RunOutput experiment_sim2d(const Context& ctx);
RunOutput experiment_blr_australian(const Context& ctx);
RunOutput experiment_blr_a9a(const Context& ctx);
RunOutput experiment_fnn_small(const Context& ctx);

}  // namespace psgld::app
