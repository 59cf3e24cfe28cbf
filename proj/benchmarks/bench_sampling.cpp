#include "revlab/sampling.hpp"

#include <benchmark/benchmark.h>

using namespace revlab;

namespace {

const HamiltonianModel kWell(AsymmetricDoubleWell{1.0, 2.0, 0.3});

void BM_SampleCanonical(benchmark::State& state) {
    const ConditioningContext ctx;
    SamplerConfig cfg;
    cfg.proposal_scale = {0.5};
    cfg.n_burnin = 500;
    cfg.n_samples = static_cast<std::size_t>(state.range(0));
    cfg.thinning = 5;
    const auto spec = EnsembleSpec::canonical(2.0);
    for (auto _ : state) benchmark::DoNotOptimize(sample_canonical(kWell, ctx, spec, cfg).acceptance_rate);
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleCanonical)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_SampleMicrocanonicalShell(benchmark::State& state) {
    const ConditioningContext ctx;
    SamplerConfig cfg;
    cfg.proposal_scale = {0.3};
    cfg.n_burnin = 500;
    cfg.n_samples = 2000;
    cfg.thinning = 5;
    const auto spec = EnsembleSpec::microcanonical(0.5, 0.01);
    for (auto _ : state) benchmark::DoNotOptimize(sample_microcanonical(kWell, ctx, 0, spec, cfg).acceptance_rate);
    state.SetItemsProcessed(state.iterations() * 2000);
}
BENCHMARK(BM_SampleMicrocanonicalShell)->Unit(benchmark::kMillisecond);

void BM_PartitionQuadrature(benchmark::State& state) {
    const ConditioningContext ctx;
    const auto left = Region::reaction_interval("left", -3.0, 0.0);
    for (auto _ : state) benchmark::DoNotOptimize(partition_function_quadrature(kWell, ctx, 1.0, left).value);
}
BENCHMARK(BM_PartitionQuadrature)->Unit(benchmark::kMicrosecond);

}  // namespace
