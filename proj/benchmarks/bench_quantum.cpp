#include "revlab/quantum.hpp"
#include "revlab/rng.hpp"

#include <benchmark/benchmark.h>

using namespace revlab;

namespace {

void BM_Eigendecomposition(benchmark::State& state) {
    Philox4x32 rng(1, 0);
    const auto h = random_symmetric(static_cast<std::size_t>(state.range(0)), rng);
    for (auto _ : state) benchmark::DoNotOptimize(QuantumSystem(h).eigenvalues()(0));
}
BENCHMARK(BM_Eigendecomposition)->RangeMultiplier(2)->Range(16, 128)->Unit(benchmark::kMicrosecond);

// One ratio-identity instance: two transition probabilities through the propagator.
void BM_QuantumRatio(benchmark::State& state) {
    const auto d = static_cast<std::size_t>(state.range(0));
    Philox4x32 rng(2, 0);
    const QuantumSystem sys(random_symmetric(d, rng));
    const auto [p_i, p_ii] = random_orthogonal_projections(d, d / 4, d / 3, rng);
    const ProjectionPair pair(sys, p_i, p_ii);
    const auto shell = full_shell(sys);
    for (auto _ : state) benchmark::DoNotOptimize(compare_quantum_ratio(sys, shell, pair, 1.3).deviation);
}
BENCHMARK(BM_QuantumRatio)->RangeMultiplier(2)->Range(16, 128)->Unit(benchmark::kMicrosecond);

void BM_QuantumEntropyIdentity(benchmark::State& state) {
    const auto d = static_cast<std::size_t>(state.range(0));
    Philox4x32 rng(3, 0);
    const QuantumSystem sys(random_symmetric(d, rng));
    const auto [p_i, p_ii] = random_spectral_projections(sys, d / 4, d / 3, rng);
    const ProjectionPair pair(sys, p_i, p_ii);
    for (auto _ : state) benchmark::DoNotOptimize(verify_quantum_entropy_identity(sys, 0.7, pair).deviation);
}
BENCHMARK(BM_QuantumEntropyIdentity)->RangeMultiplier(2)->Range(16, 128)->Unit(benchmark::kMicrosecond);

}  // namespace
