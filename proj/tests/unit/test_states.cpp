#include "revlab/errors.hpp"
#include "revlab/states.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <numbers>

namespace revlab {
namespace {

const ConditioningContext kCtx;
constexpr double kLn2 = std::numbers::ln2;

HamiltonianModel box_model(std::vector<FlatWell> wells) {
    return HamiltonianModel(PotentialSpec(PiecewiseFlatBox{std::move(wells)}));
}

Macrostate interval(const char* label, double lo, double hi) {
    return Macrostate(Region::reaction_interval(label, lo, hi));
}

HamiltonianModel harmonic(double k) { return HamiltonianModel(PotentialSpec(Harmonic{k, 0.0})); }

const Macrostate kAll("all", {Region("R", {})});

}  // namespace

TEST(RestrictedPartitionFunction, Examples) {
    const auto m = box_model({{0.0, 1.0, 0.0}, {2.0, 4.0, 0.0}});
    const Macrostate two("two", {Region::reaction_interval("a", 0, 1), Region::reaction_interval("b", 2, 4)});
    EXPECT_NEAR(restricted_partition_function(m, kCtx, 0.7, two).value, 3.0, 1e-12);
    EXPECT_NEAR(restricted_partition_function(harmonic(1.0), kCtx, 2.0, kAll).value, std::sqrt(std::numbers::pi),
                1e-10);
    const ConditioningContext pair({{"a", 0.5, 0.2, 0.1}, {"b", 0.5, 0.2, 0.1}});
    const ConditioningContext single({{"a", 1.0, 0.2, 0.1}});
    EXPECT_NEAR(restricted_partition_function(harmonic(1.0), pair, 1.0, kAll).value,
                restricted_partition_function(harmonic(1.0), single, 1.0, kAll).value, 1e-12);
}

TEST(RestrictedPartitionFunction, AdditiveOverSubstates) {
    const HamiltonianModel m(PotentialSpec(AsymmetricDoubleWell{1.0, 2.0, 0.3}));
    const auto a = Region::reaction_interval("a", -INFINITY, -0.2);
    const auto b = Region::reaction_interval("b", -0.2, 0.7);
    const auto c = Region::reaction_interval("c", 0.7, INFINITY);
    const double whole = restricted_partition_function(m, kCtx, 1.3, Macrostate("abc", {a, b, c})).value;
    const double parts = restricted_partition_function(m, kCtx, 1.3, Macrostate(a)).value +
                         restricted_partition_function(m, kCtx, 1.3, Macrostate(b)).value +
                         restricted_partition_function(m, kCtx, 1.3, Macrostate(c)).value;
    EXPECT_NEAR(whole, parts, 1e-9);
}

TEST(Entropy, Examples) {
    const auto box = box_model({{0.0, 2.0, 0.0}});
    const auto r = entropy(box, kCtx, 1.0, kAll);
    EXPECT_NEAR(r.entropy, std::log(2.0), 1e-10);

    const auto h = entropy(harmonic(1.0), kCtx, 1.0, kAll);
    EXPECT_NEAR(h.entropy, 0.5 * std::log(2 * std::numbers::pi) + 0.5, 1e-9);
    EXPECT_LE(std::abs(h.entropy - h.entropy_identity), 1e-8);

    // Two identical disjoint wells versus one: Z doubles, S gains ln 2.
    const auto twin = box_model({{0.0, 1.0, 0.0}, {2.0, 3.0, 0.0}});
    const Macrostate both("both", {Region::reaction_interval("a", 0, 1), Region::reaction_interval("b", 2, 3)});
    const auto one = entropy(twin, kCtx, 1.0, interval("a", 0, 1));
    const auto two = entropy(twin, kCtx, 1.0, both);
    EXPECT_NEAR(two.z, 2 * one.z, 1e-12);
    EXPECT_NEAR(two.entropy, one.entropy + kLn2, 1e-10);
}

TEST(Entropy, TwoRoutesAgreeOnQuadraturePath) {
    const HamiltonianModel dw(PotentialSpec(AsymmetricDoubleWell{1.0, 2.0, 0.3}));
    const HamiltonianModel dw2(PotentialSpec(AsymmetricDoubleWell{1.0, 2.0, 0.3}), {{1.3, 0.4}});
    const ConditioningContext ctx({{"a", 0.3, 0.0, 0.0}, {"b", 0.7, 0.5, 0.2}});
    for (const auto* m : {&dw, &dw2}) {
        for (double beta : {0.5, 1.0, 3.0}) {
            const auto r = entropy(*m, ctx, beta, interval("right", 0.0, INFINITY));
            EXPECT_LE(std::abs(r.entropy_discrepancy), 1e-8) << "beta " << beta;
            EXPECT_EQ(r.method, EstimationMethod::quadrature);
        }
    }
}

TEST(Entropy, MonteCarloPathMatchesQuadratureWithinCi) {
    const HamiltonianModel m(PotentialSpec(AsymmetricDoubleWell{1.0, 2.0, 0.3}), {{1.3, 0.4}});
    const auto q = entropy(m, kCtx, 1.0, interval("right", 0.0, INFINITY));
    ThermoOptions opts;
    opts.method = EstimationMethod::monte_carlo;
    opts.seed = 61;
    const auto mc = entropy(m, kCtx, 1.0, interval("right", 0.0, INFINITY), opts);
    EXPECT_EQ(mc.method, EstimationMethod::monte_carlo);
    EXPECT_NEAR(mc.z, q.z, mc.z_error + 1e-9);
    EXPECT_NEAR(mc.entropy, q.entropy, mc.entropy_error + 1e-9);
    EXPECT_NEAR(mc.mean_u, q.mean_u, mc.mean_u_error + 1e-9);
}

TEST(DeltaSInt, Examples) {
    const auto boxes = box_model({{0.0, 1.0, 0.0}, {2.0, 4.0, 0.0}});
    const auto m1 = interval("I", 0, 1), m2 = interval("II", 2, 4);
    EXPECT_EQ(delta_s_int(boxes, kCtx, 1.0, m1, m1).value, 0.0);
    EXPECT_NEAR(delta_s_int(boxes, kCtx, 1.0, m1, m2).value, kLn2, 1e-10);

    // Gaussian entropies: 0.5 ln(k_I / k_II).
    const auto d = delta_s_int(kCtx, 1.0, {harmonic(4.0), kAll}, {harmonic(1.0), kAll});
    EXPECT_NEAR(d.value, 0.5 * std::log(4.0), 1e-9);
    const HamiltonianModel heavy(PotentialSpec(Harmonic{1.0, 0.0}), {}, 2.0);
    EXPECT_THROW(delta_s_int(kCtx, 1.0, {harmonic(4.0), kAll}, {heavy, kAll}), ContractViolation);
}

TEST(MeanHeatReleased, Examples) {
    const auto boxes = box_model({{0.0, 1.0, 1.0}, {2.0, 4.0, 0.0}});
    const auto m1 = interval("I", 0, 1), m2 = interval("II", 2, 4);
    EXPECT_EQ(mean_heat_released(boxes, kCtx, 1.0, m1, m1).value, 0.0);
    EXPECT_NEAR(mean_heat_released(boxes, kCtx, 1.0, m1, m2).value, 1.0, 1e-12);
    // Equipartition: <U> = 1 / (2 beta) for any stiffness.
    EXPECT_NEAR(mean_heat_released(kCtx, 1.0, {harmonic(1.0), kAll}, {harmonic(4.0), kAll}).value, 0.0, 1e-10);
    EXPECT_NEAR(entropy(harmonic(4.0), kCtx, 1.0, kAll).mean_u, 0.5, 1e-10);
}

TEST(States, ConstantShiftScaling) {
    const HamiltonianModel m(PotentialSpec(AsymmetricDoubleWell{1.0, 2.0, 0.3}));
    const ConditioningContext base({{"a", 0.4, 0.0, 0.0}, {"b", 0.6, 0.3, 0.0}});
    const double u0 = 0.8, beta = 1.2;
    const ConditioningContext shifted = base.shifted(u0);
    const auto m1 = interval("I", -INFINITY, 0.0), m2 = interval("II", 0.0, INFINITY);
    for (const auto* mac : {&m1, &m2}) {
        const auto r0 = entropy(m, base, beta, *mac);
        const auto r1 = entropy(m, shifted, beta, *mac);
        EXPECT_NEAR(r1.z, r0.z * std::exp(-beta * u0), 1e-9);
        EXPECT_NEAR(r1.entropy, r0.entropy, 1e-9);
    }
    EXPECT_NEAR(delta_s_int(m, shifted, beta, m1, m2).value, delta_s_int(m, base, beta, m1, m2).value, 1e-9);
    EXPECT_NEAR(mean_heat_released(m, shifted, beta, m1, m2).value,
                mean_heat_released(m, base, beta, m1, m2).value, 1e-9);
}

TEST(States, MomentumFactorCancels) {
    const HamiltonianModel m(PotentialSpec(Harmonic{1.0, 0.0}), {{1.0, 0.2}}, 2.0);
    const double f = momentum_partition_factor(m, 1.5);
    EXPECT_NEAR(f, std::sqrt(2 * std::numbers::pi * 2.0 / 1.5) * std::sqrt(2 * std::numbers::pi / 1.5), 1e-12);
}

TEST(States, QuadratureFailureNamesSubstate) {
    // Unbounded flat region at floor 0 is not integrable.
    const HamiltonianModel m(PotentialSpec(Harmonic{1.0, 0.0}), {{1.0, 0.0}, {1.0, 0.0}});
    ThermoOptions opts;
    opts.method = EstimationMethod::quadrature;
    EXPECT_THROW(restricted_partition_function(m, kCtx, 1.0, kAll, opts), ContractViolation);
}

TEST(ThermoReport, SerializesProvenance) {
    const auto r = entropy(harmonic(1.0), kCtx, 1.0, kAll);
    nlohmann::json j = r;
    EXPECT_EQ(j.at("method"), "quadrature");
    EXPECT_TRUE(j.contains("per_y"));
    EXPECT_TRUE(j.at("provenance").contains("tolerance"));
    EXPECT_EQ(j.at("S").get<double>(), r.entropy);
}

}  // namespace revlab
