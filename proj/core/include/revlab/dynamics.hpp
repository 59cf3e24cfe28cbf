#pragma once

#include "revlab/model.hpp"

#include <cstddef>
#include <vector>

namespace revlab {

/// Fixed-step velocity Verlet (leapfrog). The scheme is symplectic and time-reversible.
struct IntegratorSpec {
    double dt = 1e-3;
    /// Runs whose max |H(t) - H(0)| exceeds drift_threshold * |H(0)| + 1e-10 are flagged invalid.
    double drift_threshold = 1e-4;
    /// Record a frame every this many steps (0: no frames).
    std::size_t record_every = 0;
};

struct TrajectoryFrame {
    double time = 0.0;
    PhasePoint state;
    double energy = 0.0;
};

struct Trajectory {
    PhasePoint initial;
    PhasePoint final;
    double duration = 0.0;  ///< steps * dt_used
    double dt_used = 0.0;   ///< dt, or tau / steps when tau is not a multiple of dt
    std::size_t steps = 0;
    double initial_energy = 0.0;
    double energy_drift = 0.0;  ///< max |H(t) - H(0)| over all steps
    bool valid = true;          ///< energy drift within threshold
    std::vector<TrajectoryFrame> frames;
};

/// Integrates Hamilton's equations of H(.|y) for time tau.
///
/// When tau is a multiple of dt (to 1e-9 steps) the run takes exactly tau / dt steps of size dt;
/// otherwise it takes ceil(tau / dt) equal steps of size tau / steps <= dt, which keeps the
/// discrete map time-reversible and the duration exact.
/// Smooth reaction potentials use velocity Verlet. For a piecewise-flat reaction potential the
/// reaction coordinate drifts ballistically with exact refraction/reflection at the potential
/// steps; this needs zero bath coupling and zero tilt in boundary configuration y.
/// Throws IntegrationError naming the step if the state becomes non-finite.
Trajectory evolve(const HamiltonianModel& model, const ConditioningContext& ctx, std::size_t y,
                  const PhasePoint& s, double tau, const IntegratorSpec& integ);

/// || R(evolve(R(evolve(s, tau).final), tau).final) - s ||_inf, with R the momentum flip.
double reversibility_check(const HamiltonianModel& model, const ConditioningContext& ctx, std::size_t y,
                           const PhasePoint& s, double tau, const IntegratorSpec& integ);

}  // namespace revlab
