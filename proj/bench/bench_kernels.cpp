// Serial reference loops against the OpenMP kernels.
//
//   ./bench_kernels --benchmark_filter=Sweep
//
// Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include "coopsense/mcsim.hpp"
#include "coopsense/sweep.hpp"

namespace {

using namespace coopsense;

HypothesisModel reference_model() {
  Rng rng = make_stream(1, {});
  const Placement p = sample_placement(rng, 10, 0.1, 1.0);
  return build_hypothesis_model(p, PropagationParams{}, {1.0, 1.0, 0.14}, 10);
}

template <Execution exec>
void BM_SampleStatistics(benchmark::State& state) {
  const auto model = reference_model();
  const auto kind = static_cast<StatisticKind>(state.range(0));
  const std::int64_t n = state.range(1);
  for (auto _ : state)
    benchmark::DoNotOptimize(sample_statistics(kind, model, Hypothesis::h1, n, 7, exec));
  state.SetItemsProcessed(state.iterations() * n);
  state.SetLabel(std::string(to_string(kind)));
}

template <Execution exec>
void BM_CountTail(benchmark::State& state) {
  const auto model = reference_model();
  const std::int64_t n = state.range(0);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        count_tail(StatisticKind::qm, model, Hypothesis::h0, 1.2, Side::above, n, 7, exec));
  state.SetItemsProcessed(state.iterations() * n);
}

template <Execution exec>
void BM_Sweep(benchmark::State& state) {
  ExperimentConfig c;
  c.n_placements = static_cast<int>(state.range(0));
  c.statistics = {StatisticKind::llr, StatisticKind::qm, StatisticKind::lm};
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep(c, exec));
  state.SetItemsProcessed(state.iterations() * c.n_placements *
                          static_cast<std::int64_t>(c.alpha_grid.size()));
}

void mc_args(benchmark::internal::Benchmark* b) {
  for (auto kind : {StatisticKind::qm, StatisticKind::gllr})
    b->Args({static_cast<std::int64_t>(kind), 20000});
  b->Unit(benchmark::kMillisecond);
}

}  // namespace

BENCHMARK(BM_SampleStatistics<Execution::serial>)->Apply(mc_args);
BENCHMARK(BM_SampleStatistics<Execution::parallel>)->Apply(mc_args)->UseRealTime();
BENCHMARK(BM_CountTail<Execution::serial>)->Arg(50000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CountTail<Execution::parallel>)->Arg(50000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Sweep<Execution::serial>)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Sweep<Execution::parallel>)->Arg(40)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
