#include "revlab/replicator.hpp"

#include <benchmark/benchmark.h>

#include <vector>

using namespace revlab;

namespace {

void BM_SimulateSummaries(benchmark::State& state) {
    ReplicatorParams p;
    p.g = 1.0;
    p.delta = 0.5;
    p.n0 = 100;
    const std::vector<double> checkpoints{1.0, 2.0, 3.0, 4.0, 5.0};
    const auto paths = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(simulate_summaries(p, 5.0, checkpoints, paths, 7, 1).size());
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateSummaries)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
