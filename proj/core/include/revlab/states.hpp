#pragma once

#include "revlab/model.hpp"
#include "revlab/region.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace revlab {

enum class EstimationMethod { quadrature, monte_carlo };

/// A value with an absolute error: a quadrature error bound, or a CI half-width for Monte Carlo.
struct Estimate {
    double value = 0.0;
    double error = 0.0;
};

struct ThermoOptions {
    double abs_tol = 1e-10;
    /// Force a path; by default quadrature for dim() <= 2 and Monte Carlo otherwise.
    std::optional<EstimationMethod> method;
    std::size_t mc_samples = 200'000;
    std::uint64_t seed = 0;
    double confidence = 0.95;
    /// Width of the Gaussian proposal on an unbounded reaction coordinate (MC path).
    double mc_reaction_scale = 2.0;
};

struct BoundaryThermo {
    std::string label;
    double weight = 0.0;
    double z = 0.0;       ///< sum over substates of Z_Y
    double mean_u = 0.0;  ///< mean potential under the Y-conditional restricted density
};

/// Restricted-ensemble thermodynamics of one macrostate (k_B = 1).
struct ThermoReport {
    std::string macrostate;
    double beta = 1.0;
    double z = 0.0;
    double z_error = 0.0;
    /// -sum_Y w_Y int rho_Y ln rho_Y, integrated directly.
    double entropy = 0.0;
    /// ln Z + beta <U>.
    double entropy_identity = 0.0;
    double entropy_discrepancy = 0.0;
    double entropy_error = 0.0;
    double mean_u = 0.0;
    double mean_u_error = 0.0;
    std::vector<BoundaryThermo> per_y;
    EstimationMethod method = EstimationMethod::quadrature;
    double tolerance = 0.0;
    std::uint64_t seed = 0;
    std::size_t mc_samples = 0;
};

void to_json(nlohmann::json& j, const ThermoReport& r);

/// Z(m) = sum_substates sum_Y w_Y int_{R} exp(-beta U(X|Y)) dX.
Estimate restricted_partition_function(const HamiltonianModel& model, const ConditioningContext& ctx,
                                       double beta, const Macrostate& m, const ThermoOptions& opts = {});

ThermoReport entropy(const HamiltonianModel& model, const ConditioningContext& ctx, double beta,
                     const Macrostate& m, const ThermoOptions& opts = {});

/// S(II) - S(I).
Estimate delta_s_int(const HamiltonianModel& model, const ConditioningContext& ctx, double beta,
                     const Macrostate& m_i, const Macrostate& m_ii, const ThermoOptions& opts = {});

/// <U>_I - <U>_II under the respective restricted Gibbs densities.
Estimate mean_heat_released(const HamiltonianModel& model, const ConditioningContext& ctx, double beta,
                            const Macrostate& m_i, const Macrostate& m_ii, const ThermoOptions& opts = {});

/// A macrostate with the Hamiltonian that governs it. The two sides of a comparison may use
/// different potentials as long as their kinetic forms agree, which keeps the momentum factor
/// common to both.
struct StateSpec {
    HamiltonianModel model;
    Macrostate macrostate;
};

/// Throws ContractViolation unless dimensions and masses match.
void check_same_kinetic_form(const HamiltonianModel& a, const HamiltonianModel& b);

Estimate delta_s_int(const ConditioningContext& ctx, double beta, const StateSpec& s_i, const StateSpec& s_ii,
                     const ThermoOptions& opts = {});

Estimate mean_heat_released(const ConditioningContext& ctx, double beta, const StateSpec& s_i,
                            const StateSpec& s_ii, const ThermoOptions& opts = {});

/// prod_i sqrt(2 pi m_i / beta): the momentum integral that turns configurational Z into
/// phase-space Z. Identical for any two macrostates of one model, so it cancels in I/II ratios.
double momentum_partition_factor(const HamiltonianModel& model, double beta);

}  // namespace revlab
