// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <filesystem>
#include <memory>

#include "psgld/data_io.hpp"
#include "psgld/diagnostics.hpp"
#include "psgld/models.hpp"
#include "psgld/samplers.hpp"

namespace {

using namespace psgld;

const std::filesystem::path kData = PSGLD_BENCH_DATA_DIR;

std::shared_ptr<const Dataset> a9a() {
  static auto d = std::make_shared<const Dataset>(
      load_libsvm(kData / "a9a", LibsvmOptions{"a9a", 123}));
  return d;
}

std::shared_ptr<const Dataset> mnist() {
  static auto d = std::make_shared<const Dataset>(load_mnist(kData / "mnist", "train", 1000));
  return d;
}

void BM_PsgldStep(benchmark::State& state) {
  const std::size_t D = state.range(0);
  Rng rng(1);
  ParamVector theta(D), prior(D), G(D, 0.5), z(D);
  GradientEstimate g{ParamVector(D), 50, 30000};
  rng.fill_normal(theta);
  rng.fill_normal(g.g_bar);
  for (auto _ : state) {
    rng.fill_normal(z);
    auto next = psgld_step(theta, prior, g, G, 1e-4, {}, z);
    benchmark::DoNotOptimize(next.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(D));
}
BENCHMARK(BM_PsgldStep)->Arg(123)->Arg(79510);

void BM_PrecondUpdate(benchmark::State& state) {
  const std::size_t D = state.range(0);
  PreconditionerState s(D);
  Rng rng(2);
  ParamVector g(D), G(D);
  rng.fill_normal(g);
  for (auto _ : state) {
    precond_update(s, g, G);
    benchmark::DoNotOptimize(G.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(D));
}
BENCHMARK(BM_PrecondUpdate)->Arg(123)->Arg(79510);

void BM_BlrGradient(benchmark::State& state) {
  const LogisticRegression m(a9a(), PriorConfig{10.0});
  const Minibatch batch = Minibatch::range(0, state.range(0));
  ParamVector theta(m.dim(), 0.01), out(m.dim());
  for (auto _ : state) {
    m.mean_grad(theta, batch, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BlrGradient)->Arg(50)->Arg(1000);

void BM_MlpGradient(benchmark::State& state) {
  const MlpModel m({784, 100, 10}, PriorConfig{1.0}, mnist());
  Rng rng(3);
  const ParamVector theta = m.initial_theta(rng);
  ParamVector out(m.dim());
  const Minibatch batch = Minibatch::range(0, 100);
  for (auto _ : state) {
    m.mean_grad(theta, batch, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_MlpGradient)->Unit(benchmark::kMicrosecond);

void BM_ChainIteration(benchmark::State& state) {
  const LogisticRegression m(a9a(), PriorConfig{10.0});
  SamplerConfig c;
  c.algorithm = state.range(0) ? Algorithm::pSGLD : Algorithm::SGLD;
  c.schedule = StepSchedule::constant(1e-5);
  c.minibatch_size = 50;
  c.total_iters = 1000;
  for (auto _ : state) {
    auto t = run_chain(m, c);
    benchmark::DoNotOptimize(t.samples.data());
  }
  state.SetItemsProcessed(state.iterations() * 1000);
  state.SetLabel(c.algorithm == Algorithm::pSGLD ? "pSGLD" : "SGLD");
}
BENCHMARK(BM_ChainIteration)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Act(benchmark::State& state) {
  Rng rng(4);
  std::vector<double> x(state.range(0));
  double s = 0.0;
  for (double& e : x) e = s = 0.9 * s + rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(act_of(x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Act)->Arg(10000)->Arg(200000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
