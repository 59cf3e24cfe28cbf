#pragma once

#include "revlab/dynamics.hpp"
#include "revlab/model.hpp"
#include "revlab/region.hpp"
#include "revlab/sampling.hpp"
#include "revlab/states.hpp"
#include "revlab/stats.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace revlab {

enum class Verdict { pass, fail, inconclusive };

std::string to_string(Verdict v);

struct TransitionOptions {
    /// Evolve each hit's flipped endpoint back for tau and require it to land in the from-macrostate.
    bool check_reversal = true;
    /// Also sample the to-macrostate shell and compare arrival positions with it.
    bool compute_mixing = false;
    std::size_t mixing_bins = 20;
    std::size_t min_arrivals = 30;
    double confidence = 0.95;
};

struct MixingResult {
    std::optional<double> distance;  ///< empty when inconclusive
    std::size_t arrivals = 0;
    bool inconclusive() const noexcept { return !distance.has_value(); }
};

struct TransitionEstimate {
    std::string from;
    std::string to;
    double tau = 0.0;
    std::size_t n_sampled = 0;
    std::size_t n_trajectories = 0;  ///< valid trajectories used for pi_hat
    std::size_t n_hits = 0;
    std::size_t n_escapes = 0;  ///< ended in neither macrostate
    std::size_t n_excluded_drift = 0;
    double pi_hat = 0.0;
    stats::Interval ci;
    /// n_trajectories over the autocorrelation time of the hit sequence.
    double effective_trajectories = 0.0;
    std::optional<MixingResult> mixing;
    std::vector<double> arrivals;  ///< reaction coordinate of each hit's endpoint
    std::size_t reversal_checked = 0;
    std::size_t reversal_failures = 0;
};

/// Shell points drawn from spec (whose restriction is the from-macrostate) are evolved for tau
/// and counted when they end in `to`. Runs whose energy drift exceeds the integrator threshold are
/// excluded and reported. Throws EstimationError when no valid trajectory remains.
TransitionEstimate estimate_transition(const HamiltonianModel& model, const ConditioningContext& ctx,
                                       std::size_t y, const EnsembleSpec& spec, const Macrostate& to, double tau,
                                       const IntegratorSpec& integ, const SamplerConfig& cfg,
                                       const TransitionOptions& opts = {});

/// Distance (total variation over a fixed reaction-coordinate binning spanning the reference)
/// between arrival positions and the restricted equilibrium sample. Inconclusive below
/// min_arrivals.
MixingResult mixing_diagnostic(std::span<const double> arrivals, const SampleBatch& reference,
                               std::size_t bins = 20, std::size_t min_arrivals = 30);

struct RatioIdentityReport {
    Verdict verdict = Verdict::inconclusive;
    std::string reason;
    std::optional<TransitionEstimate> forward;  ///< I -> II
    std::optional<TransitionEstimate> reverse;  ///< II -> I
    std::optional<VolumeRatio> volume;          ///< vol(P^I) / vol(P^II)
    double pi_ratio = 1.0;                      ///< pi(II->I) / pi(I->II)
    stats::Interval pi_ratio_ci{1.0, 1.0};
};

/// Compares pi(II->I)/pi(I->II) with the shell-volume ratio vol(P^I)/vol(P^II); the CIs are
/// combined by interval arithmetic and the check passes iff they overlap. Zero-hit estimates
/// and a starved mixing guard give an inconclusive verdict.
RatioIdentityReport verify_ratio_identity(const HamiltonianModel& model, const ConditioningContext& ctx,
                                          std::size_t y, double energy, double width, const Macrostate& m_i,
                                          const Macrostate& m_ii, double tau, const IntegratorSpec& integ,
                                          const SamplerConfig& transition_cfg, const SamplerConfig& volume_cfg,
                                          const TransitionOptions& opts = {});

enum class Relation { dissipation_bound, growth_bound, overestimate_bound, entropy_equality };

std::string to_string(Relation r);

struct BoundReport {
    Relation relation = Relation::dissipation_bound;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;  ///< lhs - rhs
    double error = 0.0;  ///< propagated absolute error on slack
    double tolerance = 0.0;
    bool satisfied = false;
    std::map<std::string, double> inputs;
    /// ln(pi_star / pi_true) when a true reverse probability was supplied.
    std::optional<double> overestimate_margin;

    Verdict verdict() const noexcept { return satisfied ? Verdict::pass : Verdict::fail; }
};

void to_json(nlohmann::json& j, const BoundReport& r);

/// ln(Z^I / Z^II) against -dS_int - beta <dQ> with dS_int = S(II) - S(I), <dQ> = <U>_I - <U>_II.
/// Satisfied iff |slack| <= tolerance + propagated error.
BoundReport verify_entropy_equality(const ConditioningContext& ctx, double beta, const StateSpec& s_i,
                                    const StateSpec& s_ii, const ThermoOptions& opts = {},
                                    double tolerance = 1e-8);

BoundReport verify_entropy_equality(const HamiltonianModel& model, const ConditioningContext& ctx, double beta,
                                    const Macrostate& m_i, const Macrostate& m_ii, const ThermoOptions& opts = {},
                                    double tolerance = 1e-8);

/// lhs = beta <dQ> + ln(pi_rev / pi_fwd) + dS_int >= 0. Throws ContractViolation when pi_fwd == 0
/// or a probability lies outside (0, 1].
BoundReport check_england_bound(double beta, double mean_heat, double delta_s_int, double pi_fwd, double pi_rev,
                                double error = 0.0, double tolerance = 1e-12);

/// As check_england_bound with an overestimate pi_star of the reverse probability. When pi_true
/// is given, pi_star < pi_true throws OverestimateViolation.
BoundReport check_ruelle_bound(double beta, double mean_heat, double delta_s_int, double pi_fwd,
                               double pi_star_rev, std::optional<double> pi_true_rev = std::nullopt,
                               double error = 0.0, double tolerance = 1e-12);

/// A pair of probabilities in (0, 1] with the given ratio pi_rev / pi_fwd.
std::pair<double, double> probabilities_with_ratio(double ratio);

struct AsymmetricOptions {
    /// Contiguous batches for the batch-means error of correlated outer samples.
    std::size_t batches = 50;
    double confidence = 0.95;
};

struct AsymmetricAverage {
    double mean_exp_g = 0.0;  ///< <exp G>, the estimate of Z^I / Z^II
    stats::Interval mean_exp_g_ci;
    double mean_g = 0.0;
    stats::Interval mean_g_ci;
    double exp_mean_g = 0.0;
    stats::Interval exp_mean_g_ci;
    double gap = 0.0;  ///< <exp G> - exp<G>
    stats::Interval gap_ci;
    bool constant_g = false;
    std::size_t samples = 0;
    double log_volume_i = 0.0;
    double log_volume_ii = 0.0;
    /// <U(X^I|Y)>_uniform - <U(X^II|Y)>_II, the heat term inside <G>.
    double mean_heat = 0.0;
};

/// Nested average of exp G with G = ln|R^I| - ln|R^II| - beta (U(X^I|Y) - U(X^II|Y)).
/// Outer (X^II, Y) come from the restricted canonical sampler of II (cfg); the inner X^I is uniform
/// on R^I, which needs bounded substates on both sides. Then <exp G> = Z^I / Z^II.
AsymmetricAverage asymmetric_average_F(const ConditioningContext& ctx, double beta, const StateSpec& s_i,
                                       const StateSpec& s_ii, const SamplerConfig& cfg,
                                       const AsymmetricOptions& opts = {});

/// Jensen gap and its CI from G samples taken in order (batch means over contiguous blocks).
AsymmetricAverage jensen_gap_from_samples(std::span<const double> g, const AsymmetricOptions& opts = {});

struct JensenGap {
    double gap = 0.0;
    stats::Interval ci;
    bool constant_g = false;
    bool excludes_zero() const noexcept { return ci.lo > 0.0; }
};

JensenGap jensen_gap(const ConditioningContext& ctx, double beta, const StateSpec& s_i, const StateSpec& s_ii,
                     const SamplerConfig& cfg, const AsymmetricOptions& opts = {});

}  // namespace revlab
