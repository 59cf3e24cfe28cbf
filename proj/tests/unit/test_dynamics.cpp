#include "revlab/dynamics.hpp"
#include "revlab/errors.hpp"
#include "revlab/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace revlab {
namespace {

const ConditioningContext kCtx;

HamiltonianModel harmonic() { return HamiltonianModel(PotentialSpec(Harmonic{1.0, 0.0})); }

HamiltonianModel chaotic_bath_model() {
    return HamiltonianModel(PotentialSpec(AsymmetricDoubleWell{1.0, 2.0, 0.0}), {{1.0, 0.5}, {1.6, 0.4}});
}

PhasePoint chaotic_start() { return PhasePoint({-1.0, 0.2, -0.1}, {0.9, 0.3, -0.4}); }

}  // namespace

TEST(Evolve, HarmonicPeriodReturnsToStart) {
    // q(t) = cos t, p(t) = -sin t.
    const auto traj = evolve(harmonic(), kCtx, 0, PhasePoint({1.0}, {0.0}), 2 * std::numbers::pi, {1e-3});
    EXPECT_NEAR(traj.final.q()[0], 1.0, 1e-5);
    EXPECT_NEAR(traj.final.p()[0], 0.0, 1e-5);
    EXPECT_NEAR(traj.duration, 2 * std::numbers::pi, 1e-12);
    EXPECT_TRUE(traj.valid);
}

TEST(Evolve, HarmonicMatchesClosedFormAlongTheWay) {
    const auto traj = evolve(harmonic(), kCtx, 0, PhasePoint({1.0}, {0.0}), 3.0, {1e-3, 1e-4, 500});
    ASSERT_EQ(traj.frames.size(), 7u);
    for (const auto& f : traj.frames) {
        EXPECT_NEAR(f.state.q()[0], std::cos(f.time), 1e-6);
        EXPECT_NEAR(f.state.p()[0], -std::sin(f.time), 1e-6);
    }
}

TEST(Evolve, ZeroDurationIsIdentity) {
    const auto s = chaotic_start();
    const auto traj = evolve(chaotic_bath_model(), kCtx, 0, s, 0.0, {1e-3});
    EXPECT_EQ(traj.final, s);
    EXPECT_EQ(traj.steps, 0u);
    EXPECT_EQ(traj.energy_drift, 0.0);
}

TEST(Evolve, EnergyDriftOnBathModelScalesAsDtSquared) {
    // In-well start; for barrier-crossing starts with |H(0)| near zero the relative bound is not attainable at dt = 1e-3.
    const auto m = chaotic_bath_model();
    const PhasePoint s({-1.0, 0.1, 0.0}, {0.3, 0.1, 0.1});
    const auto coarse = evolve(m, kCtx, 0, s, 10.0, {2e-3});
    const auto fine = evolve(m, kCtx, 0, s, 10.0, {1e-3});
    const auto finer = evolve(m, kCtx, 0, s, 10.0, {5e-4});
    EXPECT_NEAR(coarse.energy_drift / fine.energy_drift, 4.0, 0.8);
    EXPECT_NEAR(fine.energy_drift / finer.energy_drift, 4.0, 0.8);
    EXPECT_LE(fine.energy_drift, 1e-6 * std::abs(fine.initial_energy) + 1e-10);
}

TEST(Evolve, RejectsBadInputs) {
    const auto m = harmonic();
    EXPECT_THROW(evolve(m, kCtx, 0, PhasePoint({1.0}, {0.0}), -1.0, {1e-3}), ContractViolation);
    EXPECT_THROW(evolve(m, kCtx, 0, PhasePoint({1.0}, {0.0}), 1.0, {0.0}), ContractViolation);
    EXPECT_THROW(evolve(m, kCtx, 0, PhasePoint({1.0, 0.0}, {0.0, 0.0}), 1.0, {1e-3}), ContractViolation);
}

TEST(Evolve, BlowUpNamesTheStep) {
    // Unstable for dt * omega > 2: omega = 10, dt = 0.5.
    const HamiltonianModel stiff(PotentialSpec(Harmonic{100.0, 0.0}));
    try {
        evolve(stiff, kCtx, 0, PhasePoint({1.0}, {0.0}), 1e4, {0.5});
        FAIL() << "expected an integration error";
    } catch (const IntegrationError& e) {
        EXPECT_GT(e.step(), 0u);
    }
}

TEST(Evolve, DriftAboveThresholdFlagsRunInvalid) {
    const auto traj = evolve(harmonic(), kCtx, 0, PhasePoint({1.0}, {0.0}), 10.0, {0.2, 1e-6});
    EXPECT_FALSE(traj.valid);
}

TEST(Evolve, NonMultipleDurationUsesEqualShorterSteps) {
    const auto traj = evolve(harmonic(), kCtx, 0, PhasePoint({1.0}, {0.0}), 0.0105, {1e-3});
    EXPECT_EQ(traj.steps, 11u);
    EXPECT_LE(traj.dt_used, 1e-3);
    EXPECT_NEAR(traj.duration, 0.0105, 1e-15);
}

TEST(Evolve, CompositionIsExactForMultiplesOfDt) {
    const auto m = chaotic_bath_model();
    const auto s = chaotic_start();
    const IntegratorSpec integ{1e-3};
    const auto whole = evolve(m, kCtx, 0, s, 3.0, integ);
    const auto first = evolve(m, kCtx, 0, s, 1.25, integ);
    const auto second = evolve(m, kCtx, 0, first.final, 1.75, integ);
    EXPECT_EQ(whole.final, second.final);
}

TEST(Evolve, SingleStepReversalWithinTenUlpsPerStep) {
    const auto m = chaotic_bath_model();
    Philox4x32 rng(21, 0);
    for (int n = 0; n < 100; ++n) {
        std::vector<double> q(3), p(3);
        for (auto& x : q) x = standard_normal(rng);
        for (auto& x : p) x = standard_normal(rng);
        const PhasePoint s(q, p);
        const auto one = evolve(m, kCtx, 0, s, 1e-2, {1e-2});
        const auto back = evolve(m, kCtx, 0, time_reverse(one.final), 1e-2, {1e-2});
        const auto r = time_reverse(back.final);
        for (std::size_t i = 0; i < 3; ++i) {
            const double tol_q = 10 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(q[i]));
            const double tol_p = 10 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(p[i]));
            EXPECT_NEAR(r.q()[i], q[i], tol_q);
            EXPECT_NEAR(r.p()[i], p[i], tol_p);
        }
    }
}

TEST(Evolve, HarmonicEnergyErrorHasNoSecularDrift) {
    // Amplitude of the energy oscillation over the first 1e4 steps bounds it over 1e6 steps.
    const auto m = harmonic();
    const IntegratorSpec integ{1e-2};
    const auto early = evolve(m, kCtx, 0, PhasePoint({1.0}, {0.0}), 100.0, integ);
    const auto late = evolve(m, kCtx, 0, PhasePoint({1.0}, {0.0}), 1e4, integ);
    EXPECT_EQ(late.steps, 1'000'000u);
    EXPECT_LE(late.energy_drift, 1.01 * early.energy_drift);
    EXPECT_GT(early.energy_drift, 0.0);
}

TEST(ReversibilityCheck, HarmonicIsExactToRoundoff) {
    Philox4x32 rng(22, 0);
    for (int n = 0; n < 10; ++n) {
        const PhasePoint s({2.0 * standard_normal(rng)}, {2.0 * standard_normal(rng)});
        EXPECT_LE(reversibility_check(harmonic(), kCtx, 0, s, 5.0, {1e-3}), 1e-10);
    }
}

TEST(ReversibilityCheck, ZeroDurationIsZero) {
    EXPECT_EQ(reversibility_check(chaotic_bath_model(), kCtx, 0, chaotic_start(), 0.0, {1e-3}), 0.0);
}

TEST(ReversibilityCheck, ChaoticBathModelWithinFrozenTolerance) {
    // Tolerance frozen from a dt-halving study: deviations stay near 1e-12 for dt in {2e-3, 1e-3, 5e-4}.
    for (double dt : {2e-3, 1e-3, 5e-4}) {
        EXPECT_LE(reversibility_check(chaotic_bath_model(), kCtx, 0, chaotic_start(), 20.0, {dt}), 1e-6)
            << "dt = " << dt;
    }
}

TEST(FlatBoxDynamics, BallisticFlightRefractionAndWalls) {
    // Wells [0,2) and [2.5,3.5) at floor 0, gap at 0.5, hard walls outside.
    const HamiltonianModel m(PotentialSpec(PiecewiseFlatBox{{{0.0, 2.0, 0.0}, {2.5, 3.5, 0.0}}, 0.5}));
    // Energy 2: speed 2 in the wells, sqrt(3) in the gap.
    const PhasePoint s({1.0}, {2.0});
    const auto t1 = evolve(m, kCtx, 0, s, 0.25, {0.05});
    EXPECT_NEAR(t1.final.q()[0], 1.5, 1e-12);
    const auto t2 = evolve(m, kCtx, 0, s, 0.5 + 0.5 / std::sqrt(3.0) + 0.25, {1e-2});
    EXPECT_NEAR(t2.final.q()[0], 3.0, 1e-12);
    EXPECT_NEAR(t2.final.p()[0], 2.0, 1e-12);
    EXPECT_LE(t2.energy_drift, 1e-12);
    // Below the gap: energy 0.32 < 0.5 reflects at q = 2.
    const auto t3 = evolve(m, kCtx, 0, PhasePoint({1.0}, {0.8}), 2.5, {1e-2});
    EXPECT_NEAR(t3.final.q()[0], 1.0, 1e-12);
    EXPECT_NEAR(t3.final.p()[0], -0.8, 1e-12);
    EXPECT_LE(reversibility_check(m, kCtx, 0, PhasePoint({0.3}, {1.7}), 37.0, {1e-2}), 1e-10);
}

TEST(FlatBoxDynamics, RequiresUncoupledReactionCoordinate) {
    const HamiltonianModel coupled(PotentialSpec(PiecewiseFlatBox{{{0.0, 2.0, 0.0}}}), {{1.0, 0.5}});
    EXPECT_THROW(evolve(coupled, kCtx, 0, PhasePoint({1.0, 0.0}, {1.0, 0.0}), 1.0, {1e-2}), ContractViolation);
}

}  // namespace revlab
