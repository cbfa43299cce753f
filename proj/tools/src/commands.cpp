// SPDX-License-Identifier: Apache-2.0
#include "psgld_app/commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ostream>

#include "psgld/errors.hpp"
#include "psgld/models.hpp"
#include "psgld/numfmt.hpp"
#include "psgld/oracle.hpp"
#include "psgld/samplers.hpp"

#ifndef PSGLD_DATA_DIR_DEFAULT
#define PSGLD_DATA_DIR_DEFAULT "data"
#endif

namespace psgld::app {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Per-coordinate metrics are only useful for small models.
constexpr std::size_t kMaxReportedCoords = 32;

Dataset load_libsvm_rows(const std::filesystem::path& path, const RunConfig& cfg,
                         const std::string& limit_key) {
  LibsvmOptions opt;
  opt.name = path.filename().string();
  if (cfg.has("dims")) opt.cols = cfg.get_u64("dims", 0);
  Dataset d = load_libsvm(path, opt);
  const std::size_t limit = cfg.get_u64(limit_key, 0);
  if (limit > 0 && limit < d.rows()) {
    std::vector<std::size_t> rows(limit);
    for (std::size_t i = 0; i < limit; ++i) rows[i] = i;
    d = d.subset(rows, d.name());
  }
  return d;
}

bool parse_index(std::string_view s, std::size_t& out) {
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size() && !s.empty();
}

std::size_t class_count(const Dataset& d) {
  int hi = 0;
  for (int y : d.labels()) hi = std::max(hi, y);
  return static_cast<std::size_t>(hi) + 1;
}

}  // namespace

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("PSGLD_DATA_DIR"); env && *env) return env;
  return PSGLD_DATA_DIR_DEFAULT;
}

void set_default(RunConfig& config, const std::string& key, const std::string& value) {
  if (!config.has(key)) config.set(key, value);
}

BuiltModel build_model(const RunConfig& cfg) {
  BuiltModel b;
  const std::string kind = cfg.get_string("model", "");
  const PriorConfig prior{cfg.get_real("sigma_sq", 1.0)};
  if (kind == "gaussian") {
    const auto cov = cfg.get_list("target_cov", {0.16, 1.0});
    auto mean = cfg.get_list("target_mean", std::vector<double>(cov.size(), 0.0));
    if (mean.size() != cov.size())
      throw ConfigError("config keys 'target_mean' and 'target_cov' differ in length");
    b.model = std::make_unique<GaussianTarget>(std::move(mean), cov);
  } else if (kind == "blr") {
    Dataset train = load_libsvm_rows(cfg.get_path("dataset"), cfg, "train_limit");
    std::optional<Dataset> test;
    if (cfg.has("test_dataset")) {
      test = load_libsvm_rows(cfg.get_path("test_dataset"), cfg, "test_limit");
      const std::size_t cols = std::max(train.cols(), test->cols());
      train = train.with_cols(cols);
      test = test->with_cols(cols);
    }
    if (cfg.get_bool("standardize", false)) {
      if (test) throw ConfigError("config key 'standardize' cannot be combined with 'test_dataset'");
      train = train.standardized();
    }
    b.train = std::make_shared<const Dataset>(std::move(train));
    if (test) b.test = std::make_shared<const Dataset>(std::move(*test));
    b.model = std::make_unique<LogisticRegression>(b.train, prior);
  } else if (kind == "mlp") {
    const auto dir = cfg.get_path("dataset");
    b.train = std::make_shared<const Dataset>(load_mnist(dir, "train", cfg.get_u64("train_limit", 0)));
    const auto test_dir = cfg.has("test_dataset") ? cfg.get_path("test_dataset") : dir;
    if (std::filesystem::exists(test_dir / "t10k-images-idx3-ubyte"))
      b.test = std::make_shared<const Dataset>(load_mnist(test_dir, "t10k", cfg.get_u64("test_limit", 0)));
    std::vector<std::size_t> sizes{b.train->cols()};
    for (double h : cfg.get_list("hidden", {100.0})) {
      if (!(h >= 1.0) || h != std::floor(h)) throw ConfigError("config key 'hidden': sizes must be positive integers");
      sizes.push_back(static_cast<std::size_t>(h));
    }
    sizes.push_back(class_count(*b.train));
    b.model = std::make_unique<MlpModel>(sizes, prior, b.train);
  } else {
    throw ConfigError("config key 'model': expected gaussian, blr or mlp, got '" + kind + "'");
  }
  return b;
}

SamplerConfig sampler_config_for(const RunConfig& cfg, const Model& model) {
  SamplerConfig c = cfg.sampler_config();
  if (c.schedule.kind == ScheduleKind::BlockDecay && !cfg.has("epoch_len"))
    c.schedule.epoch_len = std::max<std::size_t>(1, model.data_size() / c.minibatch_size);
  const std::string init = cfg.get_string("init", "model");
  if (init == "zero")
    c.initial_theta = ParamVector(model.dim(), 0.0);
  else if (init != "model")
    throw ConfigError("config key 'init': expected model or zero, got '" + init + "'");
  c.validate_for(model);
  return c;
}

RunOutput cmd_sample(const Context& ctx) {
  const RunConfig& cfg = ctx.config;
  BuiltModel built = build_model(cfg);
  const Model& model = *built.model;
  SamplerConfig sc = sampler_config_for(cfg, model);
  sc.seed = ctx.seed;

  RunOutput out;
  out.command = "sample";
  out.name = cfg.get_string("name", "chain");
  out.seed = ctx.seed;
  out.config = cfg.entries();

  double max_abs = 0.0;
  double last_eps = 0.0;
  ChainObserver obs;
  obs.on_iteration = [&](std::size_t, std::span<const double> theta, double eps) {
    for (double v : theta) max_abs = std::max(max_abs, std::abs(v));
    last_eps = eps;
  };
  const auto t0 = Clock::now();
  SampleTrace trace = run_chain(model, sc, obs);
  const double secs = seconds_since(t0);

  out.add_metric("iterations", static_cast<double>(sc.total_iters), "count");
  out.add_metric("samples", static_cast<double>(trace.size()), "count");
  out.add_metric("divergence_checks_passed", static_cast<double>(sc.total_iters), "count");
  out.add_metric("final_step_size", last_eps, "eps");
  out.add_metric("S_T", trace.S_T, "eps");
  out.add_metric("max_abs_theta", max_abs, "theta");
  if (auto w = sc.schedule.warning()) out.config["schedule_warning"] = *w;
  if (!trace.empty() && model.dim() <= kMaxReportedCoords) {
    const ParamVector mean = posterior_mean(trace);
    for (std::size_t i = 0; i < mean.size(); ++i)
      out.add_metric("mean." + std::to_string(i), mean[i], "theta");
  }
  if (built.test && !trace.empty()) {
    const auto& clf = dynamic_cast<const Classifier&>(model);
    out.add_metric("test_error", test_error(trace, clf, *built.test), "percent");
  }
  out.timing["wall_seconds"] = secs;
  out.timing["iterations_per_second"] = secs > 0 ? static_cast<double>(sc.total_iters) / secs : 0.0;
  out.traces.emplace_back(out.name, std::move(trace));
  return out;
}

TestFunctional parse_functional(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw ConfigError("functional must look like coord:<i> or square:<i>");
  const std::string kind = spec.substr(0, colon);
  std::size_t idx = 0;
  if (!parse_index(std::string_view(spec).substr(colon + 1), idx))
    throw ConfigError("functional index must be a nonnegative integer: " + spec);
  if (kind == "coord") return TestFunctional::coordinate(idx);
  if (kind == "square") return TestFunctional::coordinate_square(idx);
  throw ConfigError("unknown functional kind '" + kind + "'");
}

RunOutput cmd_diagnose(const DiagnoseOptions& opt) {
  const TestFunctional phi = parse_functional(opt.functional);
  const SampleTrace trace = read_trace(opt.trace);
  RunOutput out;
  out.command = "diagnose";
  out.name = opt.trace.stem().string();
  out.seed = trace.seed;
  out.config["trace"] = opt.trace.string();
  out.config["functional"] = opt.functional;
  out.config["algorithm"] = trace.algorithm;

  std::size_t idx = 0;
  parse_index(std::string_view(opt.functional).substr(opt.functional.find(':') + 1), idx);
  if (idx >= trace.dim)
    throw ConfigError("functional " + opt.functional + " is out of range for a " +
                      std::to_string(trace.dim) + "-dimensional trace");
  const auto t0 = Clock::now();
  const DiagnosticsReport rep = diagnose(trace, phi);
  std::vector<double> values;
  values.reserve(trace.size());
  for (const Sample& s : trace.samples) values.push_back(phi.eval(s.theta));

  out.add_metric("samples", static_cast<double>(trace.size()), "count");
  out.add_metric("act", rep.tau, "iterations");
  out.add_metric("ess", rep.ess, "samples");
  out.add_metric("ess_per_sample", rep.ess / static_cast<double>(trace.size()), "ratio");
  out.add_metric("phi_hat", rep.phi_hat, "phi");
  out.add_metric("phi_hat_weighted", rep.phi_hat_weighted, "phi");
  out.add_metric("mc_standard_error", mc_standard_error(values), "phi");
  if (opt.truth) {
    const double bias = rep.phi_hat - *opt.truth;
    const double var = rep.A.front() / rep.ess;
    out.add_metric("bias", bias, "phi");
    out.add_metric("variance", var, "phi^2");
    out.add_metric("risk", bias * bias + var, "phi^2");
  }
  if (opt.true_cov) {
    if (opt.true_cov->size() != trace.dim * trace.dim)
      throw ConfigError("true covariance needs " + std::to_string(trace.dim * trace.dim) + " entries");
    out.add_metric("covariance_error", covariance_error(trace, *opt.true_cov), "frobenius");
  }
  Table acf{"acf", {"lag", "autocovariance", "autocorrelation"}, {}};
  for (std::size_t t = 0; t < rep.A.size(); ++t) acf.add_row({cell(t), cell(rep.A[t]), cell(rep.gamma[t])});
  out.curves.push_back(std::move(acf));
  out.timing["wall_seconds"] = seconds_since(t0);
  return out;
}

RunOutput cmd_oracle(const Context& ctx) {
  const RunConfig& cfg = ctx.config;
  BuiltModel built = build_model(cfg);
  const Model& model = *built.model;

  MhConfig mc;
  mc.steps = cfg.get_u64("oracle_steps", 100000);
  mc.burn_in = cfg.get_u64("burn_in", mc.steps / 10);
  mc.thinning = cfg.get_u64("thinning", 10);
  mc.seed = ctx.seed;
  if (cfg.get_string("init", "model") == "zero") mc.initial_theta = ParamVector(model.dim(), 0.0);
  const auto t0 = Clock::now();
  mc = tune_proposal(model, mc);
  const MhResult res = mh_chain(model, mc);

  RunOutput out;
  out.command = "oracle";
  out.name = cfg.get_string("name", "mh");
  out.seed = ctx.seed;
  out.config = cfg.entries();
  out.add_metric("steps", static_cast<double>(mc.steps), "count");
  out.add_metric("acceptance_rate", res.acceptance_rate, "ratio");
  out.add_metric("proposal_std", res.proposal_std, "theta");
  if (model.dim() <= kMaxReportedCoords) {
    for (std::size_t i = 0; i < model.dim(); ++i) {
      out.add_metric("mean." + std::to_string(i), res.mean[i], "theta");
      out.add_metric("se." + std::to_string(i), mc_standard_error(res.trace.coordinate(i)), "theta");
    }
    const auto cov = sample_covariance(res.trace);
    for (std::size_t i = 0; i < model.dim(); ++i)
      out.add_metric("var." + std::to_string(i), cov[i * model.dim() + i], "theta^2");
  }
  out.timing["wall_seconds"] = seconds_since(t0);
  out.traces.emplace_back(out.name, res.trace);
  return out;
}

RunOutput cmd_experiment(const std::string& name, const Context& ctx) {
  if (name == "sim2d") return experiment_sim2d(ctx);
  if (name == "blr_australian") return experiment_blr_australian(ctx);
  if (name == "blr_a9a") return experiment_blr_a9a(ctx);
  if (name == "fnn_small") return experiment_fnn_small(ctx);
  throw ConfigError("unknown experiment '" + name + "' (expected sim2d, blr_australian, blr_a9a or fnn_small)");
}

}  // namespace psgld::app
