#include "revlab/dynamics.hpp"

#include <benchmark/benchmark.h>

using namespace revlab;

namespace {

HamiltonianModel bath_model(std::size_t modes) {
    std::vector<BathMode> bath;
    for (std::size_t i = 0; i < modes; ++i) bath.push_back({1.0 + 0.3 * static_cast<double>(i), 0.4});
    return HamiltonianModel(AsymmetricDoubleWell{1.0, 2.0, 0.0}, bath);
}

// Velocity Verlet steps per second as the bath grows.
void BM_EvolveDoubleWellBath(benchmark::State& state) {
    const auto modes = static_cast<std::size_t>(state.range(0));
    const auto model = bath_model(modes);
    const ConditioningContext ctx;
    std::vector<double> q(1 + modes, 0.1), p(1 + modes, 0.2);
    q[0] = -1.0;
    const PhasePoint s(q, p);
    const IntegratorSpec integ{1e-3};
    for (auto _ : state) benchmark::DoNotOptimize(evolve(model, ctx, 0, s, 10.0, integ).energy_drift);
    state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_EvolveDoubleWellBath)->Arg(0)->Arg(1)->Arg(3)->Unit(benchmark::kMicrosecond);

void BM_ReversibilityCheck(benchmark::State& state) {
    const auto model = bath_model(2);
    const ConditioningContext ctx;
    const PhasePoint s({-1.0, 0.2, -0.1}, {0.9, 0.3, -0.4});
    for (auto _ : state) benchmark::DoNotOptimize(reversibility_check(model, ctx, 0, s, 5.0, {1e-3}));
}
BENCHMARK(BM_ReversibilityCheck)->Unit(benchmark::kMicrosecond);

}  // namespace
