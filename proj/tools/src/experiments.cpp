// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include "psgld/errors.hpp"
#include "psgld/models.hpp"
#include "psgld/numfmt.hpp"
#include "psgld/oracle.hpp"
#include "psgld/samplers.hpp"
#include "psgld_app/commands.hpp"

namespace psgld::app {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double median(std::vector<double> v) {
  if (v.empty()) throw Error("median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string lower(Algorithm a) {
  std::string s = to_string(a);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string key(Algorithm a, double eps, const std::string& what) {
  return lower(a) + ".eps=" + format_double(eps) + "." + what;
}

void note(const Context& ctx, const std::string& msg) {
  if (ctx.log) *ctx.log << msg << std::endl;
}

std::uint64_t run_seed(const Context& ctx, std::size_t r) { return Rng::derive_seed(ctx.seed, r); }

std::size_t runs_of(const RunConfig& cfg) {
  const std::size_t runs = cfg.get_u64("runs", 1);
  if (runs < 1) throw ConfigError("config key 'runs' must be >= 1");
  return runs;
}

std::vector<double> eps_grid_of(const RunConfig& cfg) {
  auto grid = cfg.get_list("eps_grid", {});
  if (grid.empty()) throw ConfigError("config key 'eps_grid' is empty");
  for (double e : grid)
    if (!(e > 0.0)) throw ConfigError("config key 'eps_grid': step sizes must be positive");
  return grid;
}

SamplerConfig with_algorithm(SamplerConfig c, Algorithm alg, std::uint64_t seed) {
  c.algorithm = alg;
  c.seed = seed;
  c.gamma_term = c.gamma_term && alg == Algorithm::pSGLD;
  return c;
}

std::string path_in(const Context& ctx, const char* name) { return (ctx.data_dir / name).string(); }

RunOutput start(const std::string& name, const Context& ctx, const RunConfig& cfg) {
  RunOutput out;
  out.command = "experiment";
  out.name = name;
  out.seed = ctx.seed;
  out.config = cfg.entries();
  return out;
}

// Mean and standard error over independent per-run estimates, per coordinate.
struct Pooled {
  ParamVector mean;
  ParamVector se;
};

Pooled pool(const std::vector<ParamVector>& runs) {
  const std::size_t R = runs.size(), D = runs.front().size();
  Pooled p{ParamVector(D, 0.0), ParamVector(D, 0.0)};
  for (const auto& v : runs)
    for (std::size_t i = 0; i < D; ++i) p.mean[i] += v[i] / static_cast<double>(R);
  if (R < 2) return p;
  for (std::size_t i = 0; i < D; ++i) {
    double ss = 0.0;
    for (const auto& v : runs) ss += (v[i] - p.mean[i]) * (v[i] - p.mean[i]);
    p.se[i] = std::sqrt(ss / static_cast<double>(R - 1) / static_cast<double>(R));
  }
  return p;
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double three_se(std::span<const double> se_a, std::span<const double> se_b) {
  double s = 0.0;
  for (std::size_t i = 0; i < se_a.size(); ++i) s += se_a[i] * se_a[i] + se_b[i] * se_b[i];
  return 3.0 * std::sqrt(s);
}

}  // namespace

RunOutput experiment_sim2d(const Context& ctx) {
  RunConfig cfg = ctx.config;
  set_default(cfg, "model", "gaussian");
  set_default(cfg, "target_cov", "0.16,1");
  set_default(cfg, "eps_grid", "0.03,0.1,0.3");
  set_default(cfg, "runs", "10");
  set_default(cfg, "total_iters", "200000");
  set_default(cfg, "burn_in", "1000");
  cfg.validate();
  const BuiltModel built = build_model(cfg);
  const auto* target = dynamic_cast<const GaussianTarget*>(built.model.get());
  if (!target) throw ConfigError("sim2d needs model = gaussian");
  const std::size_t D = target->dim();
  std::vector<double> true_cov(D * D, 0.0);
  for (std::size_t i = 0; i < D; ++i) true_cov[i * D + i] = target->cov_diag()[i];

  const SamplerConfig base = sampler_config_for(cfg, *target);
  const auto grid = eps_grid_of(cfg);
  const double eps_max = *std::max_element(grid.begin(), grid.end());
  const std::size_t runs = runs_of(cfg);

  RunOutput out = start("sim2d", ctx, cfg);
  std::vector<std::string> cols{"eps", "algorithm", "run", "cov_error"};
  for (std::size_t i = 0; i < D; ++i) cols.push_back("act_" + std::to_string(i));
  Table per_run{"sim2d_runs", cols, {}};
  Table summary{"sim2d", cols, {}};
  summary.columns.erase(summary.columns.begin() + 2);

  const auto t0 = Clock::now();
  for (double eps : grid) {
    for (Algorithm alg : {Algorithm::SGLD, Algorithm::pSGLD}) {
      std::vector<double> errs;
      std::vector<std::vector<double>> acts(D);
      for (std::size_t r = 0; r < runs; ++r) {
        SamplerConfig c = with_algorithm(base, alg, run_seed(ctx, r));
        c.schedule = StepSchedule::constant(eps);
        SampleTrace tr = run_chain(*target, c);
        errs.push_back(covariance_error(tr, true_cov));
        std::vector<std::string> row{cell(eps), to_string(alg), cell(r), cell(errs.back())};
        for (std::size_t i = 0; i < D; ++i) {
          acts[i].push_back(act_of(tr.coordinate(i)));
          row.push_back(cell(acts[i].back()));
        }
        per_run.add_row(std::move(row));
        if (r == 0 && eps == eps_max) out.traces.emplace_back(lower(alg), std::move(tr));
      }
      std::vector<std::string> row{cell(eps), to_string(alg), cell(median(errs))};
      out.add_metric(key(alg, eps, "cov_error_median"), median(errs), "frobenius");
      for (std::size_t i = 0; i < D; ++i) {
        row.push_back(cell(median(acts[i])));
        out.add_metric(key(alg, eps, "act_" + std::to_string(i) + "_median"), median(acts[i]), "iterations");
      }
      summary.add_row(std::move(row));
      note(ctx, "sim2d: eps=" + format_double(eps) + " " + to_string(alg) + " done");
    }
  }
  out.timing["wall_seconds"] = seconds_since(t0);
  out.curves.push_back(std::move(summary));
  out.curves.push_back(std::move(per_run));
  return out;
}

RunOutput experiment_blr_australian(const Context& ctx) {
  RunConfig cfg = ctx.config;
  set_default(cfg, "model", "blr");
  set_default(cfg, "dataset", path_in(ctx, "australian"));
  set_default(cfg, "standardize", "true");
  set_default(cfg, "sigma_sq", "100");
  set_default(cfg, "minibatch_size", "5");
  set_default(cfg, "total_iters", "5000");
  set_default(cfg, "burn_in", "1000");
  set_default(cfg, "runs", "50");
  set_default(cfg, "eps_grid", "1e-7,1e-6,1e-5,1e-4");
  set_default(cfg, "eps", "1e-4");
  set_default(cfg, "oracle_steps", "1000000");
  cfg.validate();
  const BuiltModel built = build_model(cfg);
  const Model& model = *built.model;
  const std::size_t D = model.dim();
  const SamplerConfig base = sampler_config_for(cfg, model);
  const double eps_ref = cfg.get_real("eps", 1e-4);
  auto grid = eps_grid_of(cfg);
  if (std::find(grid.begin(), grid.end(), eps_ref) == grid.end()) grid.push_back(eps_ref);
  const std::size_t runs = runs_of(cfg);
  RunOutput out = start("blr_australian", ctx, cfg);

  // Oracle.
  auto t0 = Clock::now();
  MhConfig mc;
  mc.steps = cfg.get_u64("oracle_steps", 1000000);
  mc.burn_in = mc.steps / 100;
  mc.thinning = 10;
  mc.seed = Rng::derive_seed(ctx.seed, 1u << 20);
  mc.initial_theta = ParamVector(D, 0.0);
  mc.proposal_std = 0.05;
  mc = tune_proposal(model, mc);
  const MhResult mh = mh_chain(model, mc);
  ParamVector mh_se(D);
  for (std::size_t i = 0; i < D; ++i) mh_se[i] = mc_standard_error(mh.trace.coordinate(i));
  out.timing["oracle_seconds"] = seconds_since(t0);
  out.add_metric("mh.acceptance_rate", mh.acceptance_rate, "ratio");
  out.add_metric("mh.proposal_std", mh.proposal_std, "theta");
  note(ctx, "blr_australian: oracle done");

  Table ess_table{"australian_ess", {"eps", "algorithm", "min_ess_median"}, {}};
  Table run_table{"australian_runs", {"eps", "algorithm", "run", "min_ess"}, {}};
  std::map<std::string, Pooled> at_ref;

  auto sweep = [&](Algorithm alg, double eps, bool gamma, const std::string& label) {
    std::vector<double> ess;
    std::vector<ParamVector> means;
    double max_abs = 0.0;
    std::size_t wild = 0;
    const auto t1 = Clock::now();
    for (std::size_t r = 0; r < runs; ++r) {
      SamplerConfig c = with_algorithm(base, alg, run_seed(ctx, r));
      c.schedule = StepSchedule::constant(eps);
      c.gamma_term = gamma;
      double run_max = 0.0;
      ChainObserver obs;
      obs.on_iteration = [&](std::size_t, std::span<const double> th, double) {
        for (double v : th) run_max = std::max(run_max, std::abs(v));
      };
      SampleTrace tr = run_chain(model, c, obs);
      max_abs = std::max(max_abs, run_max);
      if (run_max > 10.0) ++wild;
      ess.push_back(min_ess(tr));
      means.push_back(posterior_mean(tr));
      if (!gamma) run_table.add_row({cell(eps), label, cell(r), cell(ess.back())});
      if (r == 0 && eps == eps_ref) out.traces.emplace_back(lower(alg) + (gamma ? "_gamma" : ""), std::move(tr));
    }
    const double secs = seconds_since(t1);
    const double m = median(ess);
    if (gamma) {
      out.add_metric("psgld_gamma.max_abs_theta", max_abs, "theta");
      out.add_metric("psgld_gamma.runs_above_10", static_cast<double>(wild), "count");
      out.add_metric("psgld_gamma.eps=" + format_double(eps) + ".min_ess_median", m, "samples");
    } else {
      ess_table.add_row({cell(eps), label, cell(m)});
      out.add_metric(key(alg, eps, "min_ess_median"), m, "samples");
      out.timing[key(alg, eps, "seconds_per_min_ess")] = secs / static_cast<double>(runs) / m;
    }
    if (eps == eps_ref) at_ref[label] = pool(means);
    note(ctx, "blr_australian: eps=" + format_double(eps) + " " + label + " done");
  };

  for (double eps : grid)
    for (Algorithm alg : {Algorithm::SGLD, Algorithm::pSGLD}) sweep(alg, eps, false, to_string(alg));
  if (model.has_diag_hessian()) sweep(Algorithm::pSGLD, eps_ref, true, "pSGLD+gamma");

  const Pooled& ps = at_ref.at("pSGLD");
  const Pooled& sg = at_ref.at("SGLD");
  out.add_metric("psgld.distance_to_oracle", distance(ps.mean, mh.mean), "theta");
  out.add_metric("psgld.oracle_3se", three_se(ps.se, mh_se), "theta");
  out.add_metric("sgld.distance_to_oracle", distance(sg.mean, mh.mean), "theta");
  out.add_metric("sgld.oracle_3se", three_se(sg.se, mh_se), "theta");
  Table means{"australian_means",
              {"coordinate", "mh_mean", "mh_se", "psgld_mean", "psgld_se", "sgld_mean", "sgld_se"},
              {}};
  if (at_ref.count("pSGLD+gamma")) {
    const Pooled& pg = at_ref.at("pSGLD+gamma");
    out.add_metric("gamma.distance", distance(pg.mean, ps.mean), "theta");
    out.add_metric("gamma.3se", three_se(pg.se, ps.se), "theta");
    means.columns.push_back("psgld_gamma_mean");
    means.columns.push_back("psgld_gamma_se");
  }
  for (std::size_t i = 0; i < D; ++i) {
    std::vector<std::string> row{cell(i),          cell(mh.mean[i]), cell(mh_se[i]), cell(ps.mean[i]),
                                 cell(ps.se[i]),   cell(sg.mean[i]), cell(sg.se[i])};
    if (at_ref.count("pSGLD+gamma")) {
      row.push_back(cell(at_ref.at("pSGLD+gamma").mean[i]));
      row.push_back(cell(at_ref.at("pSGLD+gamma").se[i]));
    }
    means.add_row(std::move(row));
  }
  const std::size_t k = std::max<std::size_t>(1, (mh.trace.size() + 9999) / 10000);
  out.traces.emplace_back("mh", thin(mh.trace, k));
  out.timing["wall_seconds"] = seconds_since(t0);
  out.curves.push_back(std::move(ess_table));
  out.curves.push_back(std::move(run_table));
  out.curves.push_back(std::move(means));
  return out;
}

RunOutput experiment_blr_a9a(const Context& ctx) {
  RunConfig cfg = ctx.config;
  set_default(cfg, "model", "blr");
  set_default(cfg, "dataset", path_in(ctx, "a9a"));
  set_default(cfg, "test_dataset", path_in(ctx, "a9a.t"));
  set_default(cfg, "dims", "123");
  set_default(cfg, "sigma_sq", "10");
  set_default(cfg, "minibatch_size", "50");
  set_default(cfg, "thinning", "50");
  set_default(cfg, "burn_in", "500");
  set_default(cfg, "total_iters", "15000");
  set_default(cfg, "eps", "0.05");
  set_default(cfg, "eps_units", "per_datum");
  set_default(cfg, "runs", "10");
  set_default(cfg, "threshold", "15");
  cfg.validate();
  const BuiltModel built = build_model(cfg);
  const auto& clf = dynamic_cast<const Classifier&>(*built.model);
  const Dataset& test = *built.test;
  const SamplerConfig base = sampler_config_for(cfg, clf);
  const std::size_t runs = runs_of(cfg);
  const double threshold = cfg.get_real("threshold", 15.0);
  const double never = static_cast<double>(base.total_iters + 1);

  RunOutput out = start("blr_a9a", ctx, cfg);
  Table run_table{"a9a_runs", {"iteration", "algorithm", "run", "test_error"}, {}};
  Table med_table{"a9a", {"iteration", "psgld_median", "sgld_median"}, {}};
  std::map<Algorithm, std::vector<std::vector<double>>> curves;
  std::vector<std::size_t> iters;

  const auto t0 = Clock::now();
  for (Algorithm alg : {Algorithm::pSGLD, Algorithm::SGLD}) {
    std::vector<double> finals, crossings;
    for (std::size_t r = 0; r < runs; ++r) {
      const SamplerConfig c = with_algorithm(base, alg, run_seed(ctx, r));
      PredictiveEnsemble ens(clf, test);
      std::vector<double> curve;
      std::vector<std::size_t> its;
      double crossing = never;
      ChainObserver obs;
      obs.on_sample = [&](std::size_t t, const Sample& s) {
        ens.add(s.theta);
        const double err = ens.test_error();
        curve.push_back(err);
        its.push_back(t);
        if (crossing == never && err <= threshold) crossing = static_cast<double>(t);
        run_table.add_row({cell(t), to_string(alg), cell(r), cell(err)});
      };
      SampleTrace tr = run_chain(clf, c, obs);
      if (curve.empty()) throw ConfigError("blr_a9a: no samples recorded; check burn_in and total_iters");
      finals.push_back(curve.back());
      crossings.push_back(crossing);
      curves[alg].push_back(std::move(curve));
      iters = std::move(its);
      if (r == 0) out.traces.emplace_back(lower(alg), std::move(tr));
    }
    const std::string a = lower(alg);
    out.add_metric(a + ".final_error_median", median(finals), "percent");
    out.add_metric(a + ".final_error_min", *std::min_element(finals.begin(), finals.end()), "percent");
    out.add_metric(a + ".final_error_max", *std::max_element(finals.begin(), finals.end()), "percent");
    out.add_metric(a + ".crossing_median", median(crossings), "iteration (total_iters+1 = never)");
    out.add_metric(a + ".runs_reaching_threshold",
                   static_cast<double>(std::count_if(crossings.begin(), crossings.end(),
                                                     [&](double c) { return c < never; })),
                   "count");
    note(ctx, "blr_a9a: " + to_string(alg) + " done");
  }
  for (std::size_t k = 0; k < iters.size(); ++k) {
    std::vector<double> p, s;
    for (const auto& c : curves[Algorithm::pSGLD]) p.push_back(c[k]);
    for (const auto& c : curves[Algorithm::SGLD]) s.push_back(c[k]);
    med_table.add_row({cell(iters[k]), cell(median(p)), cell(median(s))});
  }
  out.timing["wall_seconds"] = seconds_since(t0);
  out.curves.push_back(std::move(med_table));
  out.curves.push_back(std::move(run_table));
  return out;
}

RunOutput experiment_fnn_small(const Context& ctx) {
  RunConfig cfg = ctx.config;
  set_default(cfg, "model", "mlp");
  set_default(cfg, "dataset", path_in(ctx, "mnist"));
  set_default(cfg, "hidden", "100");
  set_default(cfg, "sigma_sq", "1");
  set_default(cfg, "minibatch_size", "100");
  set_default(cfg, "schedule", "block_decay");
  set_default(cfg, "L_epochs", "2");
  set_default(cfg, "eps_units", "per_datum");
  set_default(cfg, "burn_in", "200");
  set_default(cfg, "thinning", "20");
  set_default(cfg, "runs", "3");
  set_default(cfg, "eps_psgld", "5e-4");
  set_default(cfg, "eps_rmsprop", "5e-4");
  set_default(cfg, "eps_sgld", "0.5");
  set_default(cfg, "eps_sgd", "0.5");
  cfg.validate();
  const BuiltModel built = build_model(cfg);
  const auto& clf = dynamic_cast<const Classifier&>(*built.model);
  if (!built.test) throw ConfigError("fnn_small needs t10k-images-idx3-ubyte next to the training files");
  const Dataset& test = *built.test;
  const std::size_t batch = cfg.get_u64("minibatch_size", 100);
  set_default(cfg, "total_iters", std::to_string(5 * (clf.data_size() / std::max<std::size_t>(1, batch))));
  const SamplerConfig base = sampler_config_for(cfg, clf);
  const std::size_t runs = runs_of(cfg);

  RunOutput out = start("fnn_small", ctx, cfg);
  Table curve_table{"fnn", {"iteration", "algorithm", "run", "test_error"}, {}};
  Table run_table{"fnn_runs", {"algorithm", "run", "test_error"}, {}};
  const std::pair<Algorithm, const char*> algs[] = {{Algorithm::pSGLD, "eps_psgld"},
                                                    {Algorithm::RMSprop, "eps_rmsprop"},
                                                    {Algorithm::SGLD, "eps_sgld"},
                                                    {Algorithm::SGD, "eps_sgd"}};
  const auto t0 = Clock::now();
  for (const auto& [alg, eps_key] : algs) {
    std::vector<double> finals;
    const double eps = cfg.get_real(eps_key, 0.0);
    const auto t1 = Clock::now();
    for (std::size_t r = 0; r < runs; ++r) {
      SamplerConfig c = with_algorithm(base, alg, run_seed(ctx, r));
      if (c.schedule.kind != ScheduleKind::Polynomial) c.schedule.eps0 = eps;
      c.schedule.validate();
      PredictiveEnsemble ens(clf, test);
      double err = 0.0;
      ParamVector last;
      ChainObserver obs;
      obs.on_sample = [&](std::size_t t, const Sample& s) {
        if (is_langevin(alg)) {
          ens.add(s.theta);
          err = ens.test_error();
        } else {
          err = test_error(clf.predict_proba(s.theta, test), clf, test);
        }
        curve_table.add_row({cell(t), to_string(alg), cell(r), cell(err)});
      };
      obs.on_iteration = [&](std::size_t t, std::span<const double> th, double) {
        if (t == c.total_iters) last.assign(th.begin(), th.end());
      };
      run_chain(clf, c, obs);
      double final_err = err;
      if (!is_langevin(alg)) final_err = test_error(clf.predict_proba(last, test), clf, test);
      else if (ens.size() == 0) throw ConfigError("fnn_small: no samples recorded; check burn_in and total_iters");
      finals.push_back(final_err);
      run_table.add_row({to_string(alg), cell(r), cell(final_err)});
    }
    out.add_metric(lower(alg) + ".test_error_median", median(finals), "percent");
    out.timing[lower(alg) + ".seconds"] = seconds_since(t1);
    note(ctx, "fnn_small: " + std::string(to_string(alg)) + " done");
  }
  out.timing["wall_seconds"] = seconds_since(t0);
  out.curves.push_back(std::move(run_table));
  out.curves.push_back(std::move(curve_table));
  return out;
}

}  // namespace psgld::app
