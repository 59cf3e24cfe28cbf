#pragma once

#include "revlab/detbal.hpp"
#include "revlab/stats.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace revlab {

/// Linear birth-death replicator: each individual divides at rate g and decays at rate delta.
/// beta, dq and ds_int are the thermodynamic cost of one replication event; they never
/// influence the simulation.
struct ReplicatorParams {
    double g = 1.0;
    double delta = 1.0;
    std::uint64_t n0 = 1;
    double beta = 1.0;
    double dq = 0.0;
    double ds_int = 0.0;

    /// Rates must be finite and nonnegative for simulation; the bound check wants them positive.
    void validate() const;
};

void to_json(nlohmann::json& j, const ReplicatorParams& p);

struct PopulationPath {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::uint64_t n0 = 0;
    double t_end = 0.0;
    std::vector<double> times;          ///< event times, strictly increasing
    std::vector<std::uint64_t> sizes;   ///< population right after each event

    std::uint64_t population_at(double t) const;
    std::size_t births() const;
    std::size_t deaths() const;
    /// Integral of n(t) over [0, t_end].
    double exposure() const;
};

/// Exact event-driven (Gillespie) sample path on [0, t_end]. Zero is absorbing.
PopulationPath simulate_population(const ReplicatorParams& params, double t_end, std::uint64_t seed,
                                   std::uint64_t stream = 0);

/// What fit_growth and the mean-path law need from a path, without storing every event.
struct PathSummary {
    std::size_t births = 0;
    std::size_t deaths = 0;
    double exposure = 0.0;
    std::vector<double> at_checkpoints;  ///< population at each requested checkpoint
};

PathSummary summarize(const PopulationPath& path, std::span<const double> checkpoints = {});

/// Simulates n_paths independent paths on streams [0, n_paths) of seed and keeps summaries.
std::vector<PathSummary> simulate_summaries(const ReplicatorParams& params, double t_end,
                                            std::span<const double> checkpoints, std::size_t n_paths,
                                            std::uint64_t seed, unsigned workers = 0);

/// Mean population at each checkpoint with its iid standard error.
std::vector<stats::MeanEstimate> mean_population(std::span<const PathSummary> paths);

struct GrowthFit {
    Verdict verdict = Verdict::inconclusive;
    std::string reason;
    std::size_t births = 0;
    std::size_t deaths = 0;
    double exposure = 0.0;
    double g_hat = 0.0;
    stats::Interval g_ci;
    double delta_hat = 0.0;
    stats::Interval delta_ci;
    double net = 0.0;  ///< g_hat - delta_hat
    stats::Interval net_ci;
    /// Weighted log-linear slope of mean population against the checkpoints; 0 without checkpoints.
    double loglinear_net = 0.0;
    double loglinear_se = 0.0;
    bool loglinear_available = false;
};

void to_json(nlohmann::json& j, const GrowthFit& f);

/// Rates from pooled event counts over pooled population-time. Inconclusive when no path has
/// at least min_events events. The net-rate interval uses the asymptotic MLE variance
/// (births + deaths) / exposure^2.
GrowthFit fit_growth(std::span<const PathSummary> paths, std::span<const double> checkpoints = {},
                     double confidence = 0.95, std::size_t min_events = 10);
GrowthFit fit_growth(std::span<const PopulationPath> paths, double confidence = 0.95);

/// lhs = beta dq + ds_int against rhs = ln(g / delta); satisfied iff slack >= -1e-12.
BoundReport check_growth_bound(const ReplicatorParams& params);

/// Rates with g / delta = f exp(beta <dQ> + dS_int), taken from an entropy-equality report, so the
/// growth bound holds with slack -ln f.
ReplicatorParams couple_to_detbal(const BoundReport& thermo, double f, double delta = 1.0, std::uint64_t n0 = 1);

/// Two columns, t and n, with one row per event plus the initial and final states.
void write_population_csv(std::ostream& out, const PopulationPath& path);

}  // namespace revlab
