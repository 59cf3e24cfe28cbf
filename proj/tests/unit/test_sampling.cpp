#include "revlab/errors.hpp"
#include "revlab/region.hpp"
#include "revlab/rng.hpp"
#include "revlab/sampling.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

namespace revlab {
namespace {

const ConditioningContext kCtx;

HamiltonianModel harmonic(double k = 1.0) { return HamiltonianModel(PotentialSpec(Harmonic{k, 0.0})); }

HamiltonianModel symmetric_double_well() { return HamiltonianModel(PotentialSpec(AsymmetricDoubleWell{1.0, 2.0, 0.0})); }

HamiltonianModel two_well_box() {
    return HamiltonianModel(PotentialSpec(PiecewiseFlatBox{{{0.0, 2.0, 0.0}, {2.5, 3.5, 0.0}}, 0.5}));
}

double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

}  // namespace

TEST(Region, MembershipIsMomentumIndependent) {
    const Region r("r", {{0, -1.0, 2.0}, {1, 0.0, 1.0}});
    Philox4x32 rng(31, 0);
    for (int n = 0; n < 10000; ++n) {
        const PhasePoint s({3 * standard_normal(rng), standard_normal(rng)}, {standard_normal(rng), standard_normal(rng)});
        EXPECT_EQ(r.contains(s), r.contains(time_reverse(s)));
    }
    EXPECT_TRUE(r.contains(std::vector<double>{-1.0, 0.0}));
    EXPECT_FALSE(r.contains(std::vector<double>{2.0, 0.5}));
    EXPECT_DOUBLE_EQ(r.volume(2), 3.0);
    EXPECT_TRUE(std::isinf(r.volume(3)));
}

TEST(Region, Validation) {
    EXPECT_THROW(Region("r", {{0, 1.0, 1.0}}), ContractViolation);
    EXPECT_THROW(Region("r", {{0, 0.0, 1.0}, {0, 2.0, 3.0}}), ContractViolation);
    EXPECT_THROW(Macrostate("m", {}), ContractViolation);
}

TEST(Macrostate, DisjointnessByRejectionSampling) {
    const Macrostate ok("ok", {Region::reaction_interval("a", 0, 1), Region::reaction_interval("b", 1, 2)});
    EXPECT_TRUE(check_disjoint(ok, 1, 10000, 1).disjoint);
    const Macrostate bad("bad", {Region::reaction_interval("a", 0, 1.5), Region::reaction_interval("b", 1, 2)});
    const auto rep = check_disjoint(bad, 1, 10000, 1);
    EXPECT_FALSE(rep.disjoint);
    EXPECT_GT(rep.overlaps, 0u);
}

TEST(PartitionFunctionQuadrature, Examples) {
    const Region all("all", {});
    const auto z = partition_function_quadrature(harmonic(), kCtx, 1.0, all);
    EXPECT_NEAR(z.value, std::sqrt(2 * std::numbers::pi), 1e-10);
    EXPECT_LE(z.error, 1e-10);

    const HamiltonianModel box(PotentialSpec(PiecewiseFlatBox{{{0.0, 2.0, 0.0}}}));
    for (double beta : {0.1, 1.0, 7.0}) {
        EXPECT_NEAR(partition_function_quadrature(box, kCtx, beta, all).value, 2.0, 1e-12);
    }
    const auto wide = partition_function_quadrature(two_well_box(), kCtx, 1.0, Region::reaction_interval("w", 0, 2));
    const auto narrow =
        partition_function_quadrature(two_well_box(), kCtx, 1.0, Region::reaction_interval("n", 2.5, 3.5));
    EXPECT_NEAR(wide.value / narrow.value, 2.0, 1e-12);
}

TEST(PartitionFunctionQuadrature, TwoDimensionalGaussian) {
    const HamiltonianModel m(PotentialSpec(Harmonic{1.0, 0.0}), {{1.5, 0.0}});
    const auto z = partition_function_quadrature(m, kCtx, 1.0, Region("all", {}));
    EXPECT_NEAR(z.value, 2 * std::numbers::pi / 1.5, 1e-9);
}

TEST(PartitionFunctionQuadrature, RejectsHighDimension) {
    const HamiltonianModel m(PotentialSpec(Harmonic{1.0, 0.0}), {{1.0, 0.0}, {2.0, 0.0}});
    EXPECT_THROW(partition_function_quadrature(m, kCtx, 1.0, Region("all", {})), ContractViolation);
}

TEST(SampleMicrocanonical, HarmonicShellSecondMoment) {
    // Uniform on the ellipse q = sqrt(2E) cos(theta): <q^2> = E.
    SamplerConfig cfg;
    cfg.proposal_scale = {0.05};
    cfg.n_samples = 20000;
    cfg.thinning = 5;
    cfg.seed = 41;
    cfg.swap_moves = {SwapMove::flow};
    cfg.flow_time = 3.0;
    cfg.flow_dt = 1e-2;
    const auto batch = sample_microcanonical(harmonic(), kCtx, 0, EnsembleSpec::microcanonical(1.0, 0.01), cfg);
    std::vector<double> q2;
    for (const auto& s : batch.points) q2.push_back(s.q()[0] * s.q()[0]);
    const auto est = stats::correlated_mean_estimate(q2);
    EXPECT_NEAR(est.mean, 1.0, 3 * est.standard_error + 0.005);
    for (const auto& s : batch.points) {
        EXPECT_TRUE(satisfies(harmonic(), kCtx, EnsembleSpec::microcanonical(1.0, 0.01), s, 0));
    }
    EXPECT_GE(batch.acceptance_rate, 0.0);
    EXPECT_LE(batch.acceptance_rate, 1.0);
}

TEST(SampleMicrocanonical, RestrictionIsEnforced) {
    SamplerConfig cfg;
    cfg.proposal_scale = {0.2};
    cfg.n_samples = 2000;
    cfg.seed = 42;
    const auto spec =
        EnsembleSpec::microcanonical(1.0, 0.1, Macrostate(Region::reaction_interval("pos", 0.0, INFINITY)));
    const auto batch = sample_microcanonical(symmetric_double_well(), kCtx, 0, spec, cfg);
    for (const auto& s : batch.points) EXPECT_GT(s.q()[0], 0.0);
}

TEST(SampleMicrocanonical, SymmetricWellHalfFractionWithSwap) {
    SamplerConfig cfg;
    cfg.proposal_scale = {0.2};
    cfg.n_samples = 20000;
    cfg.seed = 43;
    cfg.swap_moves = {SwapMove::reflect_reaction};
    // Below the barrier (E = -0.5 < 0): only the swap move can change wells.
    const auto batch =
        sample_microcanonical(symmetric_double_well(), kCtx, 0, EnsembleSpec::microcanonical(-0.5, 0.05), cfg);
    std::vector<double> right;
    for (const auto& s : batch.points) right.push_back(s.q()[0] > 0 ? 1.0 : 0.0);
    const auto est = stats::correlated_mean_estimate(right);
    EXPECT_NEAR(est.mean, 0.5, 3 * est.standard_error);
}

TEST(SampleMicrocanonical, Errors) {
    SamplerConfig cfg;
    cfg.n_samples = 10;
    // Harmonic energy is >= 0.
    EXPECT_THROW(
        {
            try {
                sample_microcanonical(harmonic(), kCtx, 0, EnsembleSpec::microcanonical(-1.0, 0.01), cfg);
            } catch (const SamplingError& e) {
                EXPECT_EQ(e.kind(), SamplingError::Kind::shell_unreachable);
                throw;
            }
        },
        SamplingError);
    const auto spec =
        EnsembleSpec::microcanonical(1.0, 0.01, Macrostate(Region::reaction_interval("far", 50.0, 51.0)));
    try {
        sample_microcanonical(harmonic(), kCtx, 0, spec, cfg);
        FAIL();
    } catch (const SamplingError& e) {
        EXPECT_EQ(e.kind(), SamplingError::Kind::empty_restriction);
    }
    EXPECT_THROW(sample_microcanonical(harmonic(), kCtx, 0, EnsembleSpec::microcanonical(1.0, 0.0), cfg),
                 ContractViolation);
    cfg.thinning = 0;
    EXPECT_THROW(sample_microcanonical(harmonic(), kCtx, 0, EnsembleSpec::microcanonical(1.0, 0.01), cfg),
                 ContractViolation);
}

TEST(SampleCanonical, HarmonicVariance) {
    SamplerConfig cfg;
    cfg.proposal_scale = {2.0};
    cfg.n_samples = 20000;
    cfg.seed = 44;
    const auto batch = sample_canonical(harmonic(), kCtx, EnsembleSpec::canonical(1.0), cfg);
    EXPECT_TRUE(batch.position_only);
    std::vector<double> q2;
    for (double q : batch.reaction_coordinates()) q2.push_back(q * q);
    const auto est = stats::correlated_mean_estimate(q2);
    EXPECT_NEAR(est.mean, 1.0, 3 * est.standard_error);
}

TEST(SampleCanonical, FlatBoxUniformMean) {
    SamplerConfig cfg;
    cfg.proposal_scale = {0.8};
    cfg.n_samples = 20000;
    cfg.seed = 45;
    const auto spec = EnsembleSpec::canonical(1.0, Macrostate(Region::reaction_interval("box", 0.0, 2.0)));
    const auto batch = sample_canonical(two_well_box(), kCtx, spec, cfg);
    const auto qs = batch.reaction_coordinates();
    const auto est = stats::correlated_mean_estimate(qs);
    EXPECT_NEAR(est.mean, 1.0, 3 * est.standard_error);
    for (double q : qs) {
        EXPECT_GE(q, 0.0);
        EXPECT_LT(q, 2.0);
    }
}

TEST(SampleCanonical, LowTemperatureConcentratesAtMinimum) {
    // Laplace: the minimizer of q^4 - 2 q^2 + 0.3 q on q > 0 solves 4q^3 - 4q + 0.3 = 0.
    const HamiltonianModel m(PotentialSpec(AsymmetricDoubleWell{1.0, 2.0, 0.3}));
    double qmin = 1.0;
    for (int i = 0; i < 50; ++i) qmin -= (4 * qmin * qmin * qmin - 4 * qmin + 0.3) / (12 * qmin * qmin - 4);
    SamplerConfig cfg;
    cfg.proposal_scale = {0.1};
    cfg.n_samples = 5000;
    cfg.seed = 46;
    const auto spec = EnsembleSpec::canonical(50.0, Macrostate(Region::reaction_interval("right", 0.0, INFINITY)));
    const auto batch = sample_canonical(m, kCtx, spec, cfg);
    EXPECT_NEAR(mean_of(batch.reaction_coordinates()), qmin, 0.05);
}

TEST(SampleCanonical, ChiSquareAgainstQuadrature) {
    // Two-sample test against the normalized density; three fresh seeds allowed.
    const HamiltonianModel m(PotentialSpec(AsymmetricDoubleWell{1.0, 2.0, 0.3}));
    const stats::Binning bins{-2.0, 2.0, 20};
    const double z = partition_function_quadrature(m, kCtx, 1.0, Region("all", {})).value;
    std::vector<double> expected(bins.bins);
    for (std::size_t i = 0; i < bins.bins; ++i) {
        double lo = bins.lo + i * bins.width(), hi = lo + bins.width();
        if (i == 0) lo = -INFINITY;
        if (i + 1 == bins.bins) hi = INFINITY;
        expected[i] = partition_function_quadrature(m, kCtx, 1.0, Region::reaction_interval("b", lo, hi)).value / z;
    }
    bool passed = false;
    for (std::uint64_t seed : {47u, 48u, 49u}) {
        SamplerConfig cfg;
        cfg.proposal_scale = {1.0};
        cfg.n_samples = 10000;
        cfg.thinning = 20;
        cfg.seed = seed;
        const auto batch = sample_canonical(m, kCtx, EnsembleSpec::canonical(1.0), cfg);
        const auto h = stats::histogram(batch.reaction_coordinates(), bins);
        double chi2 = 0.0;
        const double n = static_cast<double>(batch.points.size());
        for (std::size_t i = 0; i < bins.bins; ++i) {
            const double e = expected[i] * n;
            chi2 += (h[i] * n - e) * (h[i] * n - e) / e;
        }
        if (stats::chi_square_sf(chi2, bins.bins - 1) > 0.01) {
            passed = true;
            break;
        }
    }
    EXPECT_TRUE(passed);
}

TEST(SampleCanonical, BoundaryConfigurationsFollowWeights) {
    // Two configurations with equal weights, offset 1 on "b": P(b) = e^-1 / (1 + e^-1).
    const ConditioningContext ctx({{"a", 0.5, 0.0, 0.0}, {"b", 0.5, 1.0, 0.0}});
    SamplerConfig cfg;
    cfg.proposal_scale = {2.0};
    cfg.n_samples = 20000;
    cfg.seed = 50;
    cfg.y_move_probability = 0.3;
    const auto batch = sample_canonical(harmonic(), ctx, EnsembleSpec::canonical(1.0), cfg);
    std::vector<double> in_b;
    for (auto y : batch.y) in_b.push_back(y == 1 ? 1.0 : 0.0);
    const auto est = stats::correlated_mean_estimate(in_b);
    EXPECT_NEAR(est.mean, std::exp(-1.0) / (1 + std::exp(-1.0)), 3 * est.standard_error);
}

TEST(Sampling, DeterministicAcrossWorkerCounts) {
    SamplerConfig cfg;
    cfg.proposal_scale = {0.3};
    cfg.n_samples = 400;
    cfg.n_chains = 4;
    cfg.seed = 51;
    cfg.workers = 1;
    const auto spec = EnsembleSpec::microcanonical(0.5, 0.05);
    const auto a = sample_microcanonical(symmetric_double_well(), kCtx, 0, spec, cfg);
    cfg.workers = 4;
    const auto b = sample_microcanonical(symmetric_double_well(), kCtx, 0, spec, cfg);
    ASSERT_EQ(a.points.size(), b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) EXPECT_EQ(a.points[i], b.points[i]);
}

TEST(ApplySwap, IsAnInvolutionPreservingKineticEnergy) {
    const HamiltonianModel m(PotentialSpec(AsymmetricDoubleWell{1.0, 2.0, 0.0}), {{1.2, 0.4}, {0.7, -0.3}});
    Philox4x32 rng(52, 0);
    for (int n = 0; n < 100; ++n) {
        std::vector<double> q(3), p(3);
        for (auto& x : q) x = standard_normal(rng);
        for (auto& x : p) x = standard_normal(rng);
        const PhasePoint s(q, p);
        for (auto move : {SwapMove::reflect_reaction, SwapMove::momentum_flip}) {
            const auto t = apply_swap(m, move, 0.0, s);
            EXPECT_LE(max_abs_difference(apply_swap(m, move, 0.0, t), s), 1e-15);
            EXPECT_EQ(m.kinetic(t.p()), m.kinetic(s.p()));
        }
        // Reflection about 0 preserves H for the symmetric coupled model.
        EXPECT_NEAR(total_energy(m, apply_swap(m, SwapMove::reflect_reaction, 0.0, s), kCtx, 0),
                    total_energy(m, s, kCtx, 0), 1e-12);
    }
}

TEST(VolumeRatioOnShell, SymmetricMirrorRegions) {
    SamplerConfig cfg;
    cfg.proposal_scale = {0.2};
    cfg.n_samples = 20000;
    cfg.seed = 53;
    cfg.swap_moves = {SwapMove::reflect_reaction};
    const Macrostate left(Region::reaction_interval("L", -INFINITY, 0.0));
    const Macrostate right(Region::reaction_interval("R", 0.0, INFINITY));
    // Three standard errors, as a two-sided normal confidence level.
    const auto r = volume_ratio_on_shell(symmetric_double_well(), kCtx, 0, EnsembleSpec::microcanonical(-0.5, 0.05),
                                         left, right, cfg, 100, 0.9973);
    EXPECT_TRUE(r.ci.contains(1.0));
    EXPECT_GE(r.crossings, 100u);
}

TEST(VolumeRatioOnShell, FlatTwoWellBoxIsTwo) {
    // Energy 1 > gap floor 0.5: ballistic flow visits both wells; ratio of well lengths is 2.
    SamplerConfig cfg;
    cfg.proposal_scale = {0.3};
    cfg.n_samples = 20000;
    cfg.seed = 54;
    cfg.swap_moves = {SwapMove::flow};
    cfg.swap_probability = 0.5;
    cfg.flow_time = 4.0;
    cfg.flow_dt = 0.05;
    const Macrostate wide(Region::reaction_interval("wide", 0.0, 2.0));
    const Macrostate narrow(Region::reaction_interval("narrow", 2.5, 3.5));
    const auto r = volume_ratio_on_shell(two_well_box(), kCtx, 0, EnsembleSpec::microcanonical(1.0, 0.05), wide,
                                         narrow, cfg, 100, 0.9973);
    EXPECT_TRUE(r.ci.contains(2.0)) << r.ratio << " [" << r.ci.lo << ", " << r.ci.hi << "]";
}

TEST(VolumeRatioOnShell, IdenticalRegionsGiveExactlyOne) {
    const Macrostate a(Region::reaction_interval("A", 0.0, 1.0));
    const auto r = volume_ratio_on_shell(harmonic(), kCtx, 0, EnsembleSpec::microcanonical(1.0, 0.01), a, a, {});
    EXPECT_EQ(r.ratio, 1.0);
    EXPECT_TRUE(r.identical_regions);
}

TEST(VolumeRatioOnShell, MixingGuardRefusesStarvedChains) {
    // No swap move below the barrier: the chain never leaves its well.
    SamplerConfig cfg;
    cfg.proposal_scale = {0.05};
    cfg.n_samples = 2000;
    cfg.seed = 55;
    const Macrostate left(Region::reaction_interval("L", -INFINITY, 0.0));
    const Macrostate right(Region::reaction_interval("R", 0.0, INFINITY));
    try {
        volume_ratio_on_shell(symmetric_double_well(), kCtx, 0, EnsembleSpec::microcanonical(-0.5, 0.05), left,
                              right, cfg);
        FAIL();
    } catch (const SamplingError& e) {
        EXPECT_EQ(e.kind(), SamplingError::Kind::insufficient_exchange);
        EXPECT_LT(e.crossings(), 100u);
    }
}

TEST(WriteCsv, HeaderAndRows) {
    SampleBatch b;
    b.points = {PhasePoint({1.0}, {2.0})};
    b.y = {0};
    std::ostringstream os;
    write_csv(os, b, {{"seed", "7"}});
    EXPECT_NE(os.str().find("# seed=7"), std::string::npos);
    EXPECT_NE(os.str().find("q0,p0,y\n1,2,0\n"), std::string::npos);
}

}  // namespace revlab
