#include "revlab/dynamics.hpp"

#include "revlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace revlab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Exact ballistic motion of the reaction coordinate through a piecewise-constant potential.
class FlatDrift {
public:
    FlatDrift(const PotentialSpec& potential, double offset) : bounds_(potential.breakpoints()) {
        piece_values_.reserve(bounds_.size() + 1);
        piece_values_.push_back(kInf);
        for (std::size_t k = 1; k < bounds_.size(); ++k) {
            piece_values_.push_back(potential.value(0.5 * (bounds_[k - 1] + bounds_[k])) + offset);
        }
        piece_values_.push_back(kInf);
    }

    std::size_t piece_of(double q) const {
        return static_cast<std::size_t>(std::upper_bound(bounds_.begin(), bounds_.end(), q) - bounds_.begin());
    }

    void advance(double& q, double& p, std::size_t& piece, double mass, double dt, std::size_t step) const {
        double remaining = dt;
        for (int events = 0; remaining > 0.0; ++events) {
            if (events > 1'000'000) throw IntegrationError(step, "flat-box drift did not terminate");
            const double v = p / mass;
            if (v == 0.0) return;
            const bool right = v > 0.0;
            const double boundary = right ? bounds_[piece] : bounds_[piece - 1];
            const double t_hit = (boundary - q) / v;
            if (t_hit > remaining) {
                q += v * remaining;
                return;
            }
            q = boundary;
            remaining -= std::max(t_hit, 0.0);
            const std::size_t next = right ? piece + 1 : piece - 1;
            const double jump = piece_values_[next] - piece_values_[piece];
            const double twice_kinetic_mass = p * p;  // 2 m K
            if (std::isfinite(piece_values_[next]) && 2.0 * mass * jump < twice_kinetic_mass) {
                p = std::copysign(std::sqrt(twice_kinetic_mass - 2.0 * mass * jump), p);
                piece = next;
            } else {
                p = -p;
            }
        }
    }

private:
    std::vector<double> bounds_;
    std::vector<double> piece_values_;
};

void check_inputs(const HamiltonianModel& model, const PhasePoint& s, double tau, const IntegratorSpec& integ) {
    if (!(integ.dt > 0.0) || !std::isfinite(integ.dt)) throw ContractViolation("integrator step dt must be > 0");
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw ContractViolation("duration tau must be finite and >= 0");
    if (s.dim() != model.dim()) throw ContractViolation("phase point dimension does not match the model");
}

}  // namespace

Trajectory evolve(const HamiltonianModel& model, const ConditioningContext& ctx, std::size_t y,
                  const PhasePoint& s, double tau, const IntegratorSpec& integ) {
    check_inputs(model, s, tau, integ);
    const auto& mod = ctx[y];
    const bool flat = model.reaction_potential().is_flat();
    if (flat && (model.has_coupling() || mod.tilt != 0.0)) {
        throw ContractViolation("flat-box dynamics need zero bath coupling and zero boundary tilt");
    }

    Trajectory traj;
    traj.initial = s;
    const double ratio = tau / integ.dt;
    const double nearest = std::round(ratio);
    if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, nearest)) {
        traj.steps = static_cast<std::size_t>(nearest);
        traj.dt_used = integ.dt;
    } else {
        traj.steps = static_cast<std::size_t>(std::ceil(ratio));
        traj.dt_used = tau / static_cast<double>(traj.steps);
    }
    traj.duration = static_cast<double>(traj.steps) * traj.dt_used;
    const double dt = traj.dt_used;
    traj.initial_energy = total_energy(model, s, ctx, y);
    if (!std::isfinite(traj.initial_energy)) throw IntegrationError(0, "initial energy is not finite");

    PhasePoint state = s;
    auto q = state.q();
    auto p = state.p();
    const std::size_t n = model.dim();
    std::vector<double> grad(n);
    potential_gradient(model, q, ctx, y, grad);

    std::optional<FlatDrift> drift;
    std::size_t piece = 0;
    if (flat) {
        drift.emplace(model.reaction_potential(), mod.offset);
        piece = drift->piece_of(q[0]);
    }

    if (integ.record_every > 0) traj.frames.push_back({0.0, state, traj.initial_energy});

    const double half = 0.5 * dt;
    for (std::size_t step = 1; step <= traj.steps; ++step) {
        for (std::size_t i = 0; i < n; ++i) p[i] -= half * grad[i];
        for (std::size_t i = flat ? 1 : 0; i < n; ++i) q[i] += dt * p[i] / model.mass(i);
        if (flat) drift->advance(q[0], p[0], piece, model.mass(0), dt, step);
        potential_gradient(model, q, ctx, y, grad);
        for (std::size_t i = 0; i < n; ++i) p[i] -= half * grad[i];

        const double h = total_energy(model, state, ctx, y);
        if (!std::isfinite(h)) {
            throw IntegrationError(step, "non-finite state at step " + std::to_string(step));
        }
        traj.energy_drift = std::max(traj.energy_drift, std::abs(h - traj.initial_energy));
        if (integ.record_every > 0 && step % integ.record_every == 0) {
            traj.frames.push_back({static_cast<double>(step) * dt, state, h});
        }
    }
    traj.valid = traj.energy_drift <= integ.drift_threshold * std::abs(traj.initial_energy) + 1e-10;
    traj.final = std::move(state);
    return traj;
}

double reversibility_check(const HamiltonianModel& model, const ConditioningContext& ctx, std::size_t y,
                           const PhasePoint& s, double tau, const IntegratorSpec& integ) {
    IntegratorSpec quiet = integ;
    quiet.record_every = 0;
    const auto forward = evolve(model, ctx, y, s, tau, quiet);
    const auto back = evolve(model, ctx, y, time_reverse(forward.final), tau, quiet);
    return max_abs_difference(time_reverse(back.final), s);
}

}  // namespace revlab
