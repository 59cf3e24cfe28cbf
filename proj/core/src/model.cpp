#include "revlab/model.hpp"

#include "revlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace revlab {

PhasePoint::PhasePoint(std::vector<double> q, std::vector<double> p)
    : q_(std::move(q)), p_(std::move(p)) {
    if (q_.empty() || q_.size() != p_.size()) {
        throw ContractViolation("phase point needs dim(q) == dim(p) > 0");
    }
    const auto finite = [](double x) { return std::isfinite(x); };
    if (!std::all_of(q_.begin(), q_.end(), finite) || !std::all_of(p_.begin(), p_.end(), finite)) {
        throw ContractViolation("phase point coordinates must be finite");
    }
}

PhasePoint time_reverse(const PhasePoint& s) {
    PhasePoint out = s;
    for (double& pi : out.p()) pi = -pi;
    return out;
}

double max_abs_difference(const PhasePoint& a, const PhasePoint& b) {
    if (a.dim() != b.dim()) throw ContractViolation("phase points differ in dimension");
    double d = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        d = std::max(d, std::abs(a.q()[i] - b.q()[i]));
        d = std::max(d, std::abs(a.p()[i] - b.p()[i]));
    }
    return d;
}

// ---------------------------------------------------------------------------
// PotentialSpec

PotentialSpec::PotentialSpec(Harmonic h) : kind_(h) {
    if (!(h.stiffness > 0.0) || !std::isfinite(h.stiffness) || !std::isfinite(h.center)) {
        throw ContractViolation("harmonic potential needs finite k > 0");
    }
}

PotentialSpec::PotentialSpec(AsymmetricDoubleWell w) : kind_(w) {
    if (!(w.a > 0.0 && w.b > 0.0) || !std::isfinite(w.a) || !std::isfinite(w.b) || !std::isfinite(w.c)) {
        throw ContractViolation("double well needs finite a > 0 and b > 0");
    }
    // V'(q) = 4a q^3 - 2b q + c has local extrema at +-s; two minima need V'(-s) > 0 > V'(s).
    const double s = std::sqrt(w.b / (6.0 * w.a));
    const auto slope = [&](double q) { return 4.0 * w.a * q * q * q - 2.0 * w.b * q + w.c; };
    if (!(slope(-s) > 0.0 && slope(s) < 0.0)) {
        throw ContractViolation("double well tilt c is too large: the potential has a single minimum");
    }
}

PotentialSpec::PotentialSpec(PiecewiseFlatBox box) : kind_(std::move(box)) {
    auto& b = std::get<PiecewiseFlatBox>(kind_);
    if (b.wells.empty()) throw ContractViolation("flat box needs at least one well");
    for (const auto& w : b.wells) {
        if (!std::isfinite(w.lo) || !std::isfinite(w.hi) || !(w.hi > w.lo) || !std::isfinite(w.floor)) {
            throw ContractViolation("flat box wells need finite bounds lo < hi and a finite floor");
        }
    }
    if (std::isnan(b.gap_floor) || b.gap_floor == -std::numeric_limits<double>::infinity()) {
        throw ContractViolation("flat box gap floor must be a number or +infinity");
    }
    std::sort(b.wells.begin(), b.wells.end(), [](const FlatWell& x, const FlatWell& y) { return x.lo < y.lo; });
    for (std::size_t i = 1; i < b.wells.size(); ++i) {
        if (b.wells[i].lo < b.wells[i - 1].hi) throw ContractViolation("flat box wells overlap");
    }
}

double PotentialSpec::value(double q) const {
    return std::visit(
        [q](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Harmonic>) {
                const double d = q - v.center;
                return 0.5 * v.stiffness * d * d;
            } else if constexpr (std::is_same_v<T, AsymmetricDoubleWell>) {
                const double q2 = q * q;
                return v.a * q2 * q2 - v.b * q2 + v.c * q;
            } else {
                for (const auto& w : v.wells) {
                    if (q >= w.lo && q < w.hi) return w.floor;
                }
                if (q >= v.wells.front().lo && q < v.wells.back().hi) return v.gap_floor;
                return std::numeric_limits<double>::infinity();
            }
        },
        kind_);
}

double PotentialSpec::derivative(double q) const {
    return std::visit(
        [q](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Harmonic>) {
                return v.stiffness * (q - v.center);
            } else if constexpr (std::is_same_v<T, AsymmetricDoubleWell>) {
                return 4.0 * v.a * q * q * q - 2.0 * v.b * q + v.c;
            } else {
                return 0.0;
            }
        },
        kind_);
}

std::vector<double> PotentialSpec::breakpoints() const {
    std::vector<double> out;
    if (const auto* box = std::get_if<PiecewiseFlatBox>(&kind_)) {
        for (const auto& w : box->wells) {
            out.push_back(w.lo);
            out.push_back(w.hi);
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
    }
    return out;
}

// ---------------------------------------------------------------------------
// HamiltonianModel

HamiltonianModel::HamiltonianModel(PotentialSpec reaction_potential, std::vector<BathMode> bath,
                                   double reaction_mass)
    : potential_(std::move(reaction_potential)), bath_(std::move(bath)), mass_(reaction_mass) {
    if (!(mass_ > 0.0) || !std::isfinite(mass_)) throw ContractViolation("reaction mass must be positive");
    for (const auto& m : bath_) {
        if (!(m.frequency > 0.0) || !std::isfinite(m.frequency) || !std::isfinite(m.coupling)) {
            throw ContractViolation("bath modes need finite frequency > 0 and finite coupling");
        }
    }
}

bool HamiltonianModel::has_coupling() const noexcept {
    return std::any_of(bath_.begin(), bath_.end(), [](const BathMode& m) { return m.coupling != 0.0; });
}

double HamiltonianModel::bare_potential(std::span<const double> q) const {
    if (q.size() != dim()) throw ContractViolation("configuration dimension does not match the model");
    double u = potential_.value(q[0]);
    for (std::size_t i = 0; i < bath_.size(); ++i) {
        const double w2 = bath_[i].frequency * bath_[i].frequency;
        const double d = q[i + 1] - bath_[i].coupling * q[0] / w2;
        u += 0.5 * w2 * d * d;
    }
    return u;
}

void HamiltonianModel::bare_gradient(std::span<const double> q, std::span<double> out) const {
    if (q.size() != dim() || out.size() != dim()) {
        throw ContractViolation("configuration dimension does not match the model");
    }
    out[0] = potential_.derivative(q[0]);
    for (std::size_t i = 0; i < bath_.size(); ++i) {
        const double w2 = bath_[i].frequency * bath_[i].frequency;
        const double c = bath_[i].coupling;
        const double d = q[i + 1] - c * q[0] / w2;
        out[i + 1] = w2 * d;
        out[0] -= c * d;
    }
}

double HamiltonianModel::kinetic(std::span<const double> p) const {
    if (p.size() != dim()) throw ContractViolation("momentum dimension does not match the model");
    double k = 0.5 * p[0] * p[0] / mass_;
    for (std::size_t i = 1; i < p.size(); ++i) k += 0.5 * p[i] * p[i];
    return k;
}

// ---------------------------------------------------------------------------
// ConditioningContext

ConditioningContext::ConditioningContext() : configs_{BoundaryConfig{"0", 1.0, 0.0, 0.0}} {}

ConditioningContext::ConditioningContext(std::vector<BoundaryConfig> configs) : configs_(std::move(configs)) {
    if (configs_.empty()) throw ContractViolation("conditioning context needs at least one boundary configuration");
    double total = 0.0;
    for (const auto& c : configs_) {
        if (!(c.weight >= 0.0) || !std::isfinite(c.offset) || !std::isfinite(c.tilt)) {
            throw ContractViolation("boundary configuration '" + c.label +
                                    "' needs weight >= 0 and finite modifiers");
        }
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ContractViolation("boundary weights must sum to 1");
    for (std::size_t i = 0; i < configs_.size(); ++i) {
        for (std::size_t j = i + 1; j < configs_.size(); ++j) {
            if (configs_[i].label == configs_[j].label) {
                throw ContractViolation("duplicate boundary label '" + configs_[i].label + "'");
            }
        }
    }
}

const BoundaryConfig& ConditioningContext::operator[](std::size_t i) const {
    if (i >= configs_.size()) throw LookupError("boundary configuration index " + std::to_string(i) + " out of range");
    return configs_[i];
}

std::size_t ConditioningContext::index_of(std::string_view label) const {
    for (std::size_t i = 0; i < configs_.size(); ++i) {
        if (configs_[i].label == label) return i;
    }
    throw LookupError("unknown boundary configuration '" + std::string(label) + "'");
}

ConditioningContext ConditioningContext::shifted(double delta) const {
    auto configs = configs_;
    for (auto& c : configs) c.offset += delta;
    return ConditioningContext(std::move(configs));
}

// ---------------------------------------------------------------------------

double potential_energy(const HamiltonianModel& model, std::span<const double> q,
                        const ConditioningContext& ctx, std::size_t y) {
    const auto& mod = ctx[y];
    return model.bare_potential(q) + mod.offset + mod.tilt * q[0];
}

double potential_energy(const HamiltonianModel& model, std::span<const double> q,
                        const ConditioningContext& ctx, std::string_view y) {
    return potential_energy(model, q, ctx, ctx.index_of(y));
}

void potential_gradient(const HamiltonianModel& model, std::span<const double> q,
                        const ConditioningContext& ctx, std::size_t y, std::span<double> out) {
    const auto& mod = ctx[y];
    model.bare_gradient(q, out);
    out[0] += mod.tilt;
}

double total_energy(const HamiltonianModel& model, const PhasePoint& s,
                    const ConditioningContext& ctx, std::size_t y) {
    return model.kinetic(s.p()) + potential_energy(model, s.q(), ctx, y);
}

double total_energy(const HamiltonianModel& model, const PhasePoint& s,
                    const ConditioningContext& ctx, std::string_view y) {
    return total_energy(model, s, ctx, ctx.index_of(y));
}

}  // namespace revlab
