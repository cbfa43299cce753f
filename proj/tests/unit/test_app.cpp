// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "psgld/data_io.hpp"
#include "psgld/errors.hpp"
#include "psgld_app/commands.hpp"
#include "psgld_app/output.hpp"

namespace fs = std::filesystem;

namespace psgld::app {
namespace {

const fs::path kCli = PSGLD_CLI_PATH;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("psgld_test_app_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = kCli.string() + " -q " + args + " > " + log.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
#ifdef WEXITSTATUS
  return WEXITSTATUS(rc);
#else
  return rc;
#endif
}

RunConfig gaussian_config(std::size_t iters) {
  std::istringstream in("name = g\nmodel = gaussian\nalgorithm = sgld\neps = 0.1\nburn_in = 100\n"
                        "total_iters = " + std::to_string(iters) + "\nseed = 5\n");
  return RunConfig::parse(in);
}

TEST(Output, MetricRules) {
  RunOutput out;
  out.add_metric("a", 1.5, "");
  EXPECT_EQ(out.metric("a"), 1.5);
  EXPECT_TRUE(out.has_metric("a"));
  EXPECT_THROW(out.add_metric("a", 2.0, ""), Error);
  EXPECT_THROW(out.add_metric("b", std::nan(""), ""), Error);
  EXPECT_THROW(out.metric("zzz"), Error);
  Table t{"c", {"x", "y"}, {}};
  t.add_row({cell(1.0), cell(std::size_t{2})});
  EXPECT_THROW(t.add_row({"1"}), Error);
}

TEST(Output, SchemaOfSampleRun) {
  Context ctx{gaussian_config(2000), 5, default_data_dir(), nullptr};
  const RunOutput out = cmd_sample(ctx);
  const nlohmann::json doc = metrics_json(out);
  EXPECT_EQ(check_metrics_schema(doc), "");
  EXPECT_EQ(doc["schema_version"], kMetricsSchemaVersion);
  EXPECT_EQ(doc["command"], "sample");
  EXPECT_EQ(out.metric("samples"), 1900.0);
  EXPECT_EQ(out.metric("iterations"), 2000.0);
  nlohmann::json broken = doc;
  broken.erase("metrics");
  EXPECT_NE(check_metrics_schema(broken), "");
  broken = doc;
  broken["metrics"][0]["value"] = "x";
  EXPECT_NE(check_metrics_schema(broken), "");

  const fs::path dir = scratch("schema");
  const auto written = write_outputs(out, dir);
  ASSERT_FALSE(written.empty());
  EXPECT_EQ(written.front().filename(), "metrics.json");
  const SampleTrace back = read_trace(dir / "trace_g.csv");
  EXPECT_EQ(back, out.traces.front().second);
}

TEST(Diagnose, IidTraceAndCovariance) {
  SampleTrace t;
  t.dim = 2;
  Rng rng(8);
  for (int k = 0; k < 20000; ++k) t.samples.push_back(Sample{{0.4 * rng.normal(), rng.normal()}, 1.0});
  t.S_T = 20000;
  const fs::path dir = scratch("diag");
  write_trace(t, dir / "t.csv");
  DiagnoseOptions opt;
  opt.trace = dir / "t.csv";
  opt.functional = "square:0";
  opt.true_cov = std::vector<double>{0.16, 0.0, 0.0, 1.0};
  opt.truth = 0.16;
  const RunOutput out = cmd_diagnose(opt);
  EXPECT_GT(out.metric("ess") / 20000.0, 0.8);
  EXPECT_LT(out.metric("ess") / 20000.0, 1.2);
  EXPECT_LT(out.metric("covariance_error"), 0.05);
  EXPECT_NEAR(out.metric("phi_hat"), 0.16, 0.01);
  EXPECT_TRUE(out.has_metric("bias"));
  opt.functional = "coord:2";
  EXPECT_THROW(cmd_diagnose(opt), ConfigError);
  EXPECT_THROW(parse_functional("cube:1"), ConfigError);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("exit");
  const fs::path log = dir / "log.txt";
  EXPECT_EQ(run_cli("sample --config " + (dir / "missing.conf").string(), log), 2);

  std::ofstream(dir / "bad.conf") << "model = blr\ndataset = /no/such/data\n";
  EXPECT_EQ(run_cli("sample --config " + (dir / "bad.conf").string(), log), 2);
  EXPECT_NE(slurp(log).find("dataset"), std::string::npos);

  EXPECT_EQ(run_cli("frobnicate", log), 2);
  EXPECT_EQ(run_cli("experiment nosuch --out " + (dir / "o").string(), log), 2);

  // A well-formed trace with constant values has undefined ACT.
  SampleTrace flat;
  flat.dim = 1;
  flat.samples.assign(10, Sample{{1.0}, 1.0});
  write_trace(flat, dir / "flat.csv");
  EXPECT_EQ(run_cli("diagnose " + (dir / "flat.csv").string() + " --out " + (dir / "d").string(),
                    log),
            1);
}

TEST(Cli, RepeatedSampleIsByteIdentical) {
  const fs::path dir = scratch("repeat");
  std::ofstream(dir / "g.conf") << "name = g\nmodel = gaussian\nalgorithm = psgld\neps = 0.05\n"
                                   "burn_in = 50\nthinning = 3\ntotal_iters = 3000\n";
  const fs::path log = dir / "log.txt";
  for (const char* sub : {"a", "b"})
    ASSERT_EQ(run_cli("sample --config " + (dir / "g.conf").string() + " --seed 42 --out " +
                          (dir / sub).string(),
                      log),
              0)
        << slurp(log);
  EXPECT_EQ(slurp(dir / "a" / "trace_g.csv"), slurp(dir / "b" / "trace_g.csv"));
  auto a = nlohmann::json::parse(slurp(dir / "a" / "metrics.json"));
  auto b = nlohmann::json::parse(slurp(dir / "b" / "metrics.json"));
  EXPECT_EQ(check_metrics_schema(a), "");
  a.erase("timing");
  b.erase("timing");
  EXPECT_EQ(a.dump(), b.dump());
  EXPECT_EQ(a["seed"], 42);
}

}  // namespace
}  // namespace psgld::app
