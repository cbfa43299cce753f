// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "psgld/errors.hpp"
#include "psgld/numfmt.hpp"
#include "psgld_app/commands.hpp"

namespace {

using namespace psgld;
using namespace psgld::app;

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string algorithm;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool config_required) {
  auto* opt = cmd->add_option("--config", f.config, "run configuration file (key = value lines)");
  if (config_required) opt->required();
  cmd->add_option("--seed", f.seed, "64-bit seed; overrides the config's seed");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--algorithm", f.algorithm, "SGLD | pSGLD | SGD | RMSprop");
  cmd->add_option("--override", f.overrides, "key=value, applied after the config file (repeatable)");
}

Context make_context(const CommonFlags& f, bool quiet) {
  Context ctx;
  if (!f.config.empty()) ctx.config = RunConfig::load(f.config);
  for (const auto& o : f.overrides) ctx.config.apply_override(o);
  if (!f.algorithm.empty()) ctx.config.set("algorithm", f.algorithm);
  if (f.seed) ctx.config.set("seed", std::to_string(*f.seed));
  ctx.seed = ctx.config.get_u64("seed", 0);
  ctx.data_dir = default_data_dir();
  if (!quiet) ctx.log = &std::cerr;
  return ctx;
}

std::filesystem::path out_dir(const CommonFlags& f, const RunConfig& cfg, const std::string& name) {
  if (!f.out.empty()) return f.out;
  if (cfg.has("out")) return cfg.get_string("out");
  return std::filesystem::path("psgld-out") / name;
}

void report(const RunOutput& out, const std::filesystem::path& dir) {
  const auto written = write_outputs(out, dir);
  for (const Metric& m : out.metrics)
    std::cout << m.name << " = " << format_double(m.value) << (m.units.empty() ? "" : " ") << m.units
              << '\n';
  std::cout << "wrote " << written.size() << " files to " << dir.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Preconditioned stochastic gradient Langevin dynamics: samplers, diagnostics and experiments"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "no progress output on stderr");

  CommonFlags sample_f, oracle_f, exp_f;
  auto* sample = app.add_subcommand("sample", "run one chain from a config and write its trace");
  add_common(sample, sample_f, true);

  auto* oracle = app.add_subcommand("oracle", "random-walk Metropolis-Hastings reference for a config's model");
  add_common(oracle, oracle_f, true);

  std::string exp_name;
  auto* experiment = app.add_subcommand("experiment", "run a named experiment");
  experiment->add_option("name", exp_name, "sim2d | blr_australian | blr_a9a | fnn_small")->required();
  add_common(experiment, exp_f, false);

  DiagnoseOptions diag;
  std::string diag_out, true_cov;
  std::optional<double> truth;
  auto* diagnose = app.add_subcommand("diagnose", "ACT, ESS and estimates from a trace file");
  diagnose->add_option("trace", diag.trace, "trace file written by sample, oracle or experiment")->required();
  diagnose->add_option("--functional", diag.functional, "coord:<i> or square:<i>")->default_val("coord:0");
  diagnose->add_option("--true-cov", true_cov, "row-major covariance, comma separated");
  diagnose->add_option("--truth", truth, "true value of the functional");
  diagnose->add_option("--out", diag_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*sample) {
      Context ctx = make_context(sample_f, quiet);
      ctx.config.validate();
      const RunOutput out = cmd_sample(ctx);
      report(out, out_dir(sample_f, ctx.config, out.name));
    } else if (*oracle) {
      Context ctx = make_context(oracle_f, quiet);
      ctx.config.validate();
      const RunOutput out = cmd_oracle(ctx);
      report(out, out_dir(oracle_f, ctx.config, out.name));
    } else if (*experiment) {
      if (!exp_f.algorithm.empty())
        throw ConfigError("--algorithm does not apply to experiments; they run a fixed set of algorithms");
      Context ctx = make_context(exp_f, quiet);
      const RunOutput out = cmd_experiment(exp_name, ctx);
      report(out, out_dir(exp_f, ctx.config, exp_name));
    } else if (*diagnose) {
      if (!true_cov.empty()) {
        RunConfig tmp;
        tmp.set("target_cov", true_cov);
        diag.true_cov = tmp.get_list("target_cov", {});
      }
      diag.truth = truth;
      const RunOutput out = cmd_diagnose(diag);
      report(out, diag_out.empty() ? std::filesystem::path("psgld-out") / ("diagnose_" + out.name)
                                   : std::filesystem::path(diag_out));
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
