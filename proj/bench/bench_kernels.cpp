// Parallel kernels against their serial references. With one core the
// parallel numbers mainly show the cost of the OpenMP layer; run on a
// multi-core host (OSC_THREADS or --benchmark_filter) for speedups.

#include <benchmark/benchmark.h>

#include "osc/sde.hpp"
#include "osc/sweep.hpp"

namespace {

osc::ModelParams scenario() {
  osc::ModelParams p;
  p.alpha_f = 0.05;
  p.alpha_s = 0.1;
  p.eta_f = 0.08;
  p.eta_s = 0.16;
  p.d_omega_f = 1.0;
  p.nu = 10.0;
  p.tau = 0.1;
  return p.with_optimal_gain();
}

osc::SimConfig ensemble() {
  osc::SimConfig s;
  s.dt = 0.05;
  s.t_final = 50.0;
  s.n_paths = 2000;
  s.record_stride = 100;
  return s;
}

const osc::MeanPair kStart{2.0, 1.0, 2.0, 1.0};

void BM_EnsembleParallel(benchmark::State& state) {
  const osc::ModelParams p = scenario();
  osc::SimConfig s = ensemble();
  s.threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(osc::simulate_means(p, s, kStart));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(s.n_paths * osc::step_count(s)));
}
BENCHMARK(BM_EnsembleParallel)->Arg(1)->Arg(2)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_EnsembleReference(benchmark::State& state) {
  const osc::ModelParams p = scenario();
  const osc::SimConfig s = ensemble();
  const auto base = osc::IdenticalCase::from_filter(p);
  for (auto _ : state) benchmark::DoNotOptimize(osc::simulate_means_reference(p, s, kStart, base));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(s.n_paths * osc::step_count(s)));
}
BENCHMARK(BM_EnsembleReference)->Unit(benchmark::kMillisecond);

osc::SweepSpec map_spec(int threads) {
  osc::SweepSpec s;
  s.fixed = osc::ModelParams::matched(1.0, 1.0);
  s.axes = {osc::Axis{"alpha_f", 0.05, 5.0, 40, osc::Spacing::log}, osc::Axis{"nu", 0.0, 50.0, 40, osc::Spacing::linear}};
  s.threads = threads;
  return s;
}

void BM_SweepParallel(benchmark::State& state) {
  const osc::SweepSpec s = map_spec(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(osc::run_sweep(s));
  state.SetItemsProcessed(state.iterations() * 1600);
}
BENCHMARK(BM_SweepParallel)->Arg(1)->Arg(2)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_SweepSerial(benchmark::State& state) {
  const osc::SweepSpec s = map_spec(1);
  for (auto _ : state) benchmark::DoNotOptimize(osc::run_sweep_serial(s));
  state.SetItemsProcessed(state.iterations() * 1600);
}
BENCHMARK(BM_SweepSerial)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
