#include <benchmark/benchmark.h>

#include <random>

#include "eventgrad/comm.hpp"
#include "eventgrad/engine.hpp"
#include "eventgrad/mixing.hpp"

namespace {

using namespace eventgrad;

RunConfig base_config(Algorithm algo) {
  RunConfig cfg;
  cfg.n = 8;
  cfg.algorithm = algo;
  cfg.gamma = 0.01;
  cfg.iterations = 1;
  cfg.seed = 7;
  cfg.objective.kind = "mlp";
  cfg.objective.features = 8;
  cfg.objective.classes = 3;
  cfg.objective.hidden = 16;
  cfg.objective.samples_per_pe = 64;
  cfg.objective.batch_size = 8;
  if (algo == Algorithm::eventgrad) cfg.trigger = TriggerConfig{};
  return cfg;
}

void BM_StepRegular(benchmark::State& state) {
  Simulation sim(base_config(Algorithm::regular));
  for (auto _ : state) sim.step();
}
BENCHMARK(BM_StepRegular);

void BM_StepEventgrad(benchmark::State& state) {
  Simulation sim(base_config(Algorithm::eventgrad));
  for (auto _ : state) sim.step();
}
BENCHMARK(BM_StepEventgrad);

void BM_TopkSparsify(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd v(state.range(0));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = gauss(rng);
  for (auto _ : state) benchmark::DoNotOptimize(topk_sparsify(v, 10.0));
}
BENCHMARK(BM_TopkSparsify)->Arg(1 << 10)->Arg(1 << 14);

void BM_SpectralGap(benchmark::State& state) {
  for (auto _ : state) {
    MixingMatrix w = build_ring_mixing(static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(w.spectral_gap());
  }
}
BENCHMARK(BM_SpectralGap)->Arg(8)->Arg(32)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
