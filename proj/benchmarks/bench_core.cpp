#include <benchmark/benchmark.h>

#include "klcpd/mmdstats.hpp"
#include "klcpd/pipeline.hpp"
#include "klcpd/trainer.hpp"
#include "klcpd/tstest.hpp"

namespace {

using namespace klcpd;

Matrix gaussian(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  Matrix m(n, d);
  for (double& v : m.values()) v = z(rng);
  return m;
}

void BM_Gram(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const Matrix x = gaussian(n, 2, 1), y = gaussian(n, 2, 2);
  const RbfKernel k(1.0);
  for (auto _ : st) benchmark::DoNotOptimize(gram(x, y, k));
  st.SetComplexityN(st.range(0));
}
BENCHMARK(BM_Gram)->RangeMultiplier(2)->Range(64, 1024)->Complexity(benchmark::oNSquared);

void BM_Mmd2Unbiased(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const Matrix x = gaussian(n, 2, 1), y = gaussian(n, 2, 2);
  const RbfKernel k(1.0);
  for (auto _ : st) benchmark::DoNotOptimize(mmd2_unbiased(x, y, k));
}
BENCHMARK(BM_Mmd2Unbiased)->Arg(50)->Arg(500);

void BM_PermutationThreshold(benchmark::State& st) {
  const Matrix x = gaussian(50, 1, 1), y = gaussian(50, 1, 2);
  const RbfKernel k(median_heuristic(x, y));
  TestConfig cfg;
  Rng rng(3);
  for (auto _ : st) benchmark::DoNotOptimize(permutation_threshold(x, y, k, cfg, rng));
}
BENCHMARK(BM_PermutationThreshold);

void BM_GruEncodeWindow(benchmark::State& st) {
  Rng rng(4);
  const DeepKernel dk = DeepKernel::gru(1, static_cast<std::size_t>(st.range(0)), rng);
  const Matrix window = gaussian(kDefaultWindow, 1, 5);
  for (auto _ : st) benchmark::DoNotOptimize(dk.encode(window));
}
BENCHMARK(BM_GruEncodeWindow)->Arg(3)->Arg(10)->Arg(32);

PairBatch bench_batch(std::size_t b) {
  const Matrix series = gaussian(1000, 1, 6);
  Rng rng(7);
  const auto starts = sample_starts(series.rows(), kDefaultWindow, b, rng);
  return make_batch(series, starts, kDefaultWindow);
}

// Forward and backward of the full objective through every store.
void BM_ObjectiveForwardBackward(benchmark::State& st) {
  TrainConfig cfg;
  TrainState s = init_state(1, cfg);
  const PairBatch batch = bench_batch(static_cast<std::size_t>(st.range(0)));
  Rng rng(8);
  ObjectiveInputs in;
  in.batch = &batch;
  in.omega = sample_noise(cfg.noise, batch.size(), cfg.d_h, rng);
  in.lambda = cfg.lambda;
  in.beta = cfg.beta;
  for (auto _ : st)
    benchmark::DoNotOptimize(evaluate_objective(s.dk, s.gen, in, {true, true, true}).objective);
}
BENCHMARK(BM_ObjectiveForwardBackward)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_KernelStep(benchmark::State& st) {
  TrainConfig cfg;
  TrainState s = init_state(1, cfg);
  const PairBatch batch = bench_batch(cfg.batch);
  Rng rng(9);
  for (auto _ : st) benchmark::DoNotOptimize(kernel_step(batch, s, cfg, rng).objective);
}
BENCHMARK(BM_KernelStep)->Unit(benchmark::kMillisecond);

void BM_ScoreSeries(benchmark::State& st) {
  TrainConfig cfg;
  const TrainState s = init_state(1, cfg);
  const Matrix series = gaussian(static_cast<std::size_t>(st.range(0)), 1, 10);
  for (auto _ : st) benchmark::DoNotOptimize(score(series, ScoreMode::klcpd, &s.dk).size());
}
BENCHMARK(BM_ScoreSeries)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
