#pragma once

#include "revlab/dynamics.hpp"
#include "revlab/model.hpp"
#include "revlab/quadrature.hpp"
#include "revlab/region.hpp"
#include "revlab/stats.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace revlab {

/// Thickened energy shell |H - E| <= width / 2.
struct Microcanonical {
    double energy = 1.0;
    double width = 0.01;
};

/// Configurational Gibbs density exp(-beta U).
struct Canonical {
    double beta = 1.0;
};

struct EnsembleSpec {
    std::variant<Microcanonical, Canonical> kind;
    std::optional<Macrostate> restriction;

    static EnsembleSpec microcanonical(double energy, double width,
                                       std::optional<Macrostate> restriction = std::nullopt);
    static EnsembleSpec canonical(double beta, std::optional<Macrostate> restriction = std::nullopt);
};

/// Throws ContractViolation if width <= 0 or beta <= 0.
void validate(const EnsembleSpec& spec);

/// Involutive, volume-preserving proposals used to hop barriers.
enum class SwapMove {
    /// q -> 2c - q on the reaction coordinate, bath coordinates reflected about their
    /// coupled equilibrium; momenta untouched.
    reflect_reaction,
    /// p -> -p.
    momentum_flip,
    /// Momentum flip composed with a leapfrog flow of random length; accepted moves are
    /// followed by a second flip, so the chain advances along the flow.
    flow,
    /// Rotation of the mass-scaled momenta (p_i / sqrt(m_i), p_j / sqrt(m_j)) in a random coordinate
    /// plane by a uniform angle. Not an involution, but linear with unit determinant and paired
    /// with its inverse at equal probability; kinetic energy is unchanged. Needs dim >= 2.
    momentum_rotation,
};

struct SamplerConfig {
    /// Random-walk step per coordinate. One entry broadcasts; for the shell sampler a vector
    /// of length 2*dim gives separate q and p scales, length dim applies to both.
    std::vector<double> proposal_scale{0.1};
    std::size_t n_burnin = 1000;
    std::size_t n_samples = 1000;
    std::size_t thinning = 10;
    std::uint64_t seed = 0;
    /// Chains use streams stream_base, stream_base + 1, ...
    std::uint64_t stream_base = 0;
    std::size_t n_chains = 1;
    unsigned workers = 1;
    std::vector<SwapMove> swap_moves;
    double swap_probability = 0.2;
    double reflection_center = 0.0;
    /// Flow moves integrate for a uniform random number of steps in [1, flow_time / flow_dt].
    double flow_time = 1.0;
    double flow_dt = 1e-2;
    /// Probability of a boundary-configuration move in the canonical sampler.
    double y_move_probability = 0.1;
    std::optional<std::vector<double>> initial_q;
};

/// Throws ContractViolation unless n_samples > 0, thinning >= 1, n_chains >= 1 and scales > 0.
void validate(const SamplerConfig& cfg);

/// Applies a swap involution (flow excluded). S(S(s)) == s.
PhasePoint apply_swap(const HamiltonianModel& model, SwapMove move, double center, const PhasePoint& s);

struct SampleBatch {
    std::vector<PhasePoint> points;  ///< momenta are zero when position_only
    std::vector<std::size_t> y;      ///< boundary configuration per sample
    std::vector<double> weights;     ///< uniform
    bool position_only = false;
    double acceptance_rate = 0.0;
    std::size_t chains = 0;
    /// Integrated autocorrelation times: "iat_reaction", "iat_energy".
    std::map<std::string, double> diagnostics;

    std::vector<double> reaction_coordinates() const;
};

/// Pure membership predicate of an ensemble's support.
bool satisfies(const HamiltonianModel& model, const ConditioningContext& ctx, const EnsembleSpec& spec,
               const PhasePoint& s, std::size_t y);

/// Metropolis random walk on the thickened shell (intersected with the restriction) for
/// boundary configuration y. Throws SamplingError (shell_unreachable, empty_restriction).
SampleBatch sample_microcanonical(const HamiltonianModel& model, const ConditioningContext& ctx, std::size_t y,
                                  const EnsembleSpec& spec, const SamplerConfig& cfg);

/// Configurational Metropolis on the joint (X, Y) density w_Y exp(-beta U(X|Y)) restricted to the
/// ensemble's restriction.
SampleBatch sample_canonical(const HamiltonianModel& model, const ConditioningContext& ctx,
                             const EnsembleSpec& spec, const SamplerConfig& cfg);

/// Z_Y(R) = int_R exp(-beta U(X|Y)) dX by adaptive quadrature (dim <= 2).
QuadratureResult partition_function_quadrature(const HamiltonianModel& model, const ConditioningContext& ctx,
                                               std::size_t y, double beta, const Region& region,
                                               double abs_tol = 1e-10);

/// sum_Y w_Y Z_Y(R).
QuadratureResult partition_function_quadrature(const HamiltonianModel& model, const ConditioningContext& ctx,
                                               double beta, const Region& region, double abs_tol = 1e-10);

struct VolumeRatio {
    double ratio = 1.0;
    stats::Interval ci{1.0, 1.0};
    std::size_t count_a = 0;
    std::size_t count_b = 0;
    std::size_t crossings = 0;
    std::size_t samples = 0;
    double effective_samples = 0.0;
    bool identical_regions = false;
};

/// Shell-volume ratio vol(A) / vol(B) from a single mixed chain.
/// Throws SamplingError(insufficient_exchange) when A-B crossings < min_crossings.
VolumeRatio volume_ratio_on_shell(const HamiltonianModel& model, const ConditioningContext& ctx, std::size_t y,
                                  const EnsembleSpec& spec, const Macrostate& a, const Macrostate& b,
                                  const SamplerConfig& cfg, std::size_t min_crossings = 100,
                                  double confidence = 0.95);

/// Writes '# key=value' metadata lines, a header row, then one row per sample.
void write_csv(std::ostream& os, const SampleBatch& batch, const std::map<std::string, std::string>& metadata = {});

}  // namespace revlab
