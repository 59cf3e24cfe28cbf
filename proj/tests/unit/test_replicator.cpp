#include "revlab/errors.hpp"
#include "revlab/replicator.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

namespace revlab {
namespace {

ReplicatorParams rates(double g, double delta, std::uint64_t n0 = 1) {
    ReplicatorParams p;
    p.g = g;
    p.delta = delta;
    p.n0 = n0;
    return p;
}

BoundReport fake_equality(double beta, double mean_heat, double delta_s_int) {
    BoundReport r;
    r.relation = Relation::entropy_equality;
    r.inputs = {{"beta", beta}, {"mean_heat", mean_heat}, {"delta_s_int", delta_s_int}};
    return r;
}

}  // namespace

TEST(Replicator, ParamsValidation) {
    EXPECT_THROW(rates(-1.0, 1.0).validate(), ContractViolation);
    EXPECT_THROW(rates(1.0, std::nan("")).validate(), ContractViolation);
    EXPECT_THROW(rates(1.0, 1.0, 0).validate(), ContractViolation);
    EXPECT_NO_THROW(rates(0.0, 1.0).validate());
    EXPECT_THROW(simulate_population(rates(1, 1), 0.0, 1), ContractViolation);
}

TEST(Replicator, PathInvariants) {
    const auto path = simulate_population(rates(1.0, 0.8, 20), 4.0, 11, 3);
    ASSERT_FALSE(path.times.empty());
    std::uint64_t prev = path.n0;
    double t = 0.0;
    for (std::size_t i = 0; i < path.times.size(); ++i) {
        EXPECT_GT(path.times[i], t);
        EXPECT_LT(path.times[i], path.t_end);
        const auto diff = static_cast<long long>(path.sizes[i]) - static_cast<long long>(prev);
        EXPECT_TRUE(diff == 1 || diff == -1);
        t = path.times[i];
        prev = path.sizes[i];
    }
    EXPECT_EQ(path.births() + path.deaths(), path.times.size());
    EXPECT_EQ(path.population_at(0.0), 20u);
    EXPECT_EQ(path.population_at(path.t_end), prev);
    // Same (seed, stream) gives the same path; summaries agree with the stored path.
    const auto again = simulate_population(rates(1.0, 0.8, 20), 4.0, 11, 3);
    EXPECT_EQ(again.times, path.times);
    const std::vector<double> cps{0.0, 1.0, 2.5, 4.0};
    const auto s = summarize(path, cps);
    EXPECT_EQ(s.at_checkpoints.back(), static_cast<double>(prev));
}

TEST(Replicator, SummariesMatchStoredPaths) {
    const auto p = rates(1.2, 0.9, 5);
    const std::vector<double> cps{0.0, 0.7, 1.9, 3.0};
    const auto sums = simulate_summaries(p, 3.0, cps, 50, 21, 3);
    for (std::size_t i = 0; i < sums.size(); ++i) {
        const auto ref = summarize(simulate_population(p, 3.0, 21, i), cps);
        EXPECT_EQ(sums[i].births, ref.births);
        EXPECT_EQ(sums[i].deaths, ref.deaths);
        EXPECT_EQ(sums[i].at_checkpoints, ref.at_checkpoints);
        EXPECT_NEAR(sums[i].exposure, ref.exposure, 1e-9 * (1.0 + ref.exposure));
    }
}

TEST(Replicator, ExtinctionIsAbsorbing) {
    const auto path = simulate_population(rates(0.2, 3.0, 2), 20.0, 5);
    ASSERT_EQ(path.sizes.back(), 0u);
    EXPECT_EQ(path.population_at(19.99), 0u);
}

TEST(Replicator, YuleMeanIsE) {
    const std::vector<double> cps{1.0};
    const auto paths = simulate_summaries(rates(1.0, 0.0), 1.0, cps, 10000, 31);
    const auto m = mean_population(paths).front();
    EXPECT_LE(std::abs(m.mean - std::numbers::e), 3.0 * m.standard_error) << m.mean << " +- " << m.standard_error;
}

TEST(Replicator, PureDeathNonincreasing) {
    for (std::uint64_t s = 0; s < 200; ++s) {
        const auto path = simulate_population(rates(0.0, 0.7, 15), 5.0, 41, s);
        std::uint64_t prev = path.n0;
        for (auto n : path.sizes) {
            EXPECT_LT(n, prev);
            prev = n;
        }
    }
}

TEST(Replicator, MeanPathLawAtFiveCheckpoints) {
    const std::vector<double> cps{1.0, 2.0, 3.0, 4.0, 5.0};
    const auto paths = simulate_summaries(rates(1.0, 0.5, 100), 5.0, cps, 10000, 51);
    const auto means = mean_population(paths);
    for (std::size_t c = 0; c < cps.size(); ++c) {
        const double oracle = 100.0 * std::exp(0.5 * cps[c]);
        EXPECT_LE(std::abs(means[c].mean - oracle), 3.0 * means[c].standard_error)
            << "t=" << cps[c] << " mean " << means[c].mean << " oracle " << oracle;
    }
    EXPECT_NEAR(100.0 * std::exp(2.5), 1218.249, 1e-3);
}

TEST(FitGrowth, SyntheticCounts) {
    PathSummary s;
    s.births = 50;
    s.deaths = 0;
    s.exposure = 100.0;
    const std::vector<PathSummary> one{s};
    const auto fit = fit_growth(one);
    EXPECT_EQ(fit.verdict, Verdict::pass);
    EXPECT_DOUBLE_EQ(fit.g_hat, 0.5);
    EXPECT_EQ(fit.delta_hat, 0.0);
    EXPECT_EQ(fit.delta_ci.lo, 0.0);
    EXPECT_TRUE(fit.g_ci.contains(0.5));
}

TEST(FitGrowth, TooFewEventsInconclusive) {
    PathSummary s;
    s.births = 4;
    s.deaths = 3;
    s.exposure = 10.0;
    const std::vector<PathSummary> few(5, s);
    const auto fit = fit_growth(few);
    EXPECT_EQ(fit.verdict, Verdict::inconclusive);
    EXPECT_NE(fit.reason.find("too few events"), std::string::npos);
    EXPECT_EQ(fit_growth(std::span<const PathSummary>{}).verdict, Verdict::inconclusive);
}

TEST(FitGrowth, PureBirthGivesZeroDeathRate) {
    std::vector<PopulationPath> paths;
    for (std::uint64_t s = 0; s < 20; ++s) paths.push_back(simulate_population(rates(1.0, 0.0, 5), 3.0, 61, s));
    const auto fit = fit_growth(paths);
    EXPECT_EQ(fit.delta_hat, 0.0);
    EXPECT_EQ(fit.deaths, 0u);
}

TEST(FitGrowth, BalancedRatesNetContainsZero) {
    const std::vector<double> cps{0.0, 1.0, 2.0, 3.0};
    const auto paths = simulate_summaries(rates(1.0, 1.0, 10), 3.0, cps, 10000, 71);
    const auto fit = fit_growth(paths, cps);
    EXPECT_TRUE(fit.net_ci.contains(0.0)) << fit.net_ci.lo << " " << fit.net_ci.hi;
    ASSERT_TRUE(fit.loglinear_available);
    EXPECT_LE(std::abs(fit.loglinear_net), 4.0 * fit.loglinear_se + 1e-3);
}

TEST(FitGrowth, RecoversNineRateCombinations) {
    // 18 simultaneous intervals, so each is taken at 99.9 percent.
    const std::vector<double> cps{0.0, 0.5, 1.0, 1.5, 2.0};
    std::uint64_t seed = 80;
    for (double g : {0.5, 1.0, 2.0}) {
        for (double d : {0.5, 1.0, 2.0}) {
            const auto paths = simulate_summaries(rates(g, d, 20), 2.0, cps, 2000, ++seed);
            const auto fit = fit_growth(paths, cps, 0.999);
            ASSERT_EQ(fit.verdict, Verdict::pass);
            EXPECT_TRUE(fit.g_ci.contains(g)) << g << "," << d << ": " << fit.g_ci.lo << ".." << fit.g_ci.hi;
            EXPECT_TRUE(fit.delta_ci.contains(d)) << g << "," << d << ": " << fit.delta_ci.lo << ".." << fit.delta_ci.hi;
            EXPECT_TRUE(fit.net_ci.contains(g - d));
            ASSERT_TRUE(fit.loglinear_available);
            EXPECT_LE(std::abs(fit.loglinear_net - (g - d)), 4.0 * fit.loglinear_se + 0.05);
        }
    }
}

TEST(GrowthBound, Examples) {
    ReplicatorParams p = rates(std::exp(3.0), 1.0);
    p.beta = 1.0;
    p.dq = 2.0;
    p.ds_int = 1.0;
    const auto eq = check_growth_bound(p);
    EXPECT_EQ(eq.relation, Relation::growth_bound);
    EXPECT_NEAR(eq.slack, 0.0, 1e-14);
    EXPECT_TRUE(eq.satisfied);

    p.g = std::exp(3.0) * 0.5;
    EXPECT_NEAR(check_growth_bound(p).slack, std::log(2.0), 1e-14);

    p.g = std::exp(4.0);
    const auto bad = check_growth_bound(p);
    EXPECT_FALSE(bad.satisfied);
    EXPECT_EQ(bad.verdict(), Verdict::fail);
    EXPECT_NEAR(bad.slack, -1.0, 1e-14);

    EXPECT_THROW(check_growth_bound(rates(0.0, 1.0)), ContractViolation);
    EXPECT_THROW(check_growth_bound(rates(1.0, 0.0)), ContractViolation);
}

TEST(GrowthBound, OnlyTheRatioMatters) {
    // Dyadic rates keep the scaled products exact, so the comparison can be bitwise.
    for (auto [g, d] : {std::pair{1.5, 0.25}, std::pair{3.0, 0.75}, std::pair{0.625, 2.0}}) {
        ReplicatorParams a = rates(g, d);
        a.beta = 0.8;
        a.dq = 1.3;
        a.ds_int = -0.4;
        ReplicatorParams b = a;
        b.g *= 7.0;
        b.delta *= 7.0;
        auto ra = check_growth_bound(a);
        auto rb = check_growth_bound(b);
        EXPECT_EQ(ra.lhs, rb.lhs);
        EXPECT_EQ(ra.rhs, rb.rhs);
        EXPECT_EQ(ra.slack, rb.slack);
        EXPECT_EQ(ra.satisfied, rb.satisfied);
        EXPECT_EQ(ra.inputs.at("g_over_delta"), rb.inputs.at("g_over_delta"));
        ra.inputs.erase("g");
        ra.inputs.erase("delta");
        rb.inputs.erase("g");
        rb.inputs.erase("delta");
        EXPECT_EQ(ra.inputs, rb.inputs);
    }
}

TEST(CoupleToDetbal, SlackIsMinusLogF) {
    const auto thermo = fake_equality(1.3, 0.9, -0.2);
    for (double f : {1.0, 0.9, 0.5, 0.1}) {
        const auto p = couple_to_detbal(thermo, f, 0.7, 10);
        const auto r = check_growth_bound(p);
        EXPECT_NEAR(r.slack, -std::log(f), 1e-12) << f;
        EXPECT_TRUE(r.satisfied);
        EXPECT_EQ(p.n0, 10u);
    }
    EXPECT_THROW(couple_to_detbal(thermo, 0.0), ContractViolation);
    EXPECT_THROW(couple_to_detbal(thermo, 1.5), ContractViolation);
    BoundReport other;
    other.relation = Relation::dissipation_bound;
    EXPECT_THROW(couple_to_detbal(other, 1.0), ContractViolation);
}

TEST(CoupleToDetbal, FlatBoxComposition) {
    // beta <dQ> = 1 and dS_int = -ln 2 give g / delta = e / 2.
    const auto p = couple_to_detbal(fake_equality(1.0, 1.0, -std::log(2.0)), 1.0);
    EXPECT_NEAR(p.g / p.delta, std::numbers::e / 2.0, 1e-14);
    EXPECT_NEAR(check_growth_bound(p).slack, 0.0, 1e-12);
}

TEST(Replicator, CsvAndJson) {
    const auto path = simulate_population(rates(1.0, 0.5, 3), 1.0, 91);
    std::ostringstream out;
    write_population_csv(out, path);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t,n");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, path.times.size() + 2);
    const nlohmann::json j = check_growth_bound(rates(2.0, 1.0));
    EXPECT_EQ(j.at("relation"), "growth_bound");
    const nlohmann::json pj = rates(2.0, 1.0);
    EXPECT_EQ(pj.at("g"), 2.0);
}

}  // namespace revlab
