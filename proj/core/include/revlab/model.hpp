#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace revlab {

/// A point (q, p) of phase space in dimensionless model units.
class PhasePoint {
public:
    PhasePoint() = default;
    /// Throws ContractViolation unless dim(q) == dim(p) > 0 and every coordinate is finite.
    PhasePoint(std::vector<double> q, std::vector<double> p);

    std::span<const double> q() const noexcept { return q_; }
    std::span<const double> p() const noexcept { return p_; }
    std::span<double> q() noexcept { return q_; }
    std::span<double> p() noexcept { return p_; }
    std::size_t dim() const noexcept { return q_.size(); }

    friend bool operator==(const PhasePoint&, const PhasePoint&) = default;

private:
    std::vector<double> q_;
    std::vector<double> p_;
};

/// q -> q, p -> -p.
PhasePoint time_reverse(const PhasePoint& s);

/// Max-norm distance over all phase coordinates.
double max_abs_difference(const PhasePoint& a, const PhasePoint& b);

struct Harmonic {
    double stiffness = 1.0;
    double center = 0.0;
};

/// a q^4 - b q^2 + c q.
struct AsymmetricDoubleWell {
    double a = 1.0;
    double b = 2.0;
    double c = 0.0;
};

struct FlatWell {
    double lo = 0.0;
    double hi = 1.0;
    double floor = 0.0;
};

/// Piecewise-constant potential: each well has its own floor, the gaps between wells sit at
/// `gap_floor` (which may be +infinity), and everything outside the hull of the wells is a
/// hard wall.
struct PiecewiseFlatBox {
    std::vector<FlatWell> wells;
    double gap_floor = std::numeric_limits<double>::infinity();
};

/// Potential of the reaction coordinate. Construction validates the parameters.
class PotentialSpec {
public:
    using Variant = std::variant<Harmonic, AsymmetricDoubleWell, PiecewiseFlatBox>;

    PotentialSpec(Harmonic h);
    PotentialSpec(AsymmetricDoubleWell w);
    PotentialSpec(PiecewiseFlatBox box);

    const Variant& kind() const noexcept { return kind_; }
    bool is_flat() const noexcept { return std::holds_alternative<PiecewiseFlatBox>(kind_); }

    double value(double q) const;
    /// dV/dq; zero inside flat pieces (the discontinuities carry no force).
    double derivative(double q) const;
    /// Points where the potential is not smooth, sorted ascending.
    std::vector<double> breakpoints() const;

private:
    Variant kind_;
};

/// Bath oscillator entering as 1/2 p^2 + 1/2 w^2 (x - c q / w^2)^2.
struct BathMode {
    double frequency = 1.0;
    double coupling = 0.0;
};

/// H = p_q^2 / 2m + V(q) + sum_i [1/2 p_i^2 + 1/2 w_i^2 (x_i - c_i q / w_i^2)^2].
/// Configuration coordinates are ordered (q, x_1, ..., x_n).
class HamiltonianModel {
public:
    HamiltonianModel(PotentialSpec reaction_potential, std::vector<BathMode> bath = {},
                     double reaction_mass = 1.0);

    const PotentialSpec& reaction_potential() const noexcept { return potential_; }
    const std::vector<BathMode>& bath() const noexcept { return bath_; }
    double reaction_mass() const noexcept { return mass_; }
    std::size_t dim() const noexcept { return 1 + bath_.size(); }
    bool has_coupling() const noexcept;

    /// Potential without boundary modifiers.
    double bare_potential(std::span<const double> q) const;
    /// Gradient of bare_potential, written into `out` (size dim()).
    void bare_gradient(std::span<const double> q, std::span<double> out) const;
    double kinetic(std::span<const double> p) const;
    /// Mass of configuration coordinate i.
    double mass(std::size_t i) const noexcept { return i == 0 ? mass_ : 1.0; }

private:
    PotentialSpec potential_;
    std::vector<BathMode> bath_;
    double mass_;
};

/// One configuration of the boundary region: adds `offset + tilt * q` to the potential.
struct BoundaryConfig {
    std::string label;
    double weight = 1.0;
    double offset = 0.0;
    double tilt = 0.0;
};

/// Finite weighted set of boundary configurations Y. Weights are nonnegative and sum to 1.
class ConditioningContext {
public:
    /// The single trivial configuration "0" with weight 1.
    ConditioningContext();
    explicit ConditioningContext(std::vector<BoundaryConfig> configs);

    std::size_t size() const noexcept { return configs_.size(); }
    const BoundaryConfig& operator[](std::size_t i) const;
    const std::vector<BoundaryConfig>& configs() const noexcept { return configs_; }
    /// Throws LookupError for an unknown label.
    std::size_t index_of(std::string_view label) const;
    /// Copy with `delta` added to every offset.
    ConditioningContext shifted(double delta) const;

private:
    std::vector<BoundaryConfig> configs_;
};

/// U(X|Y).
double potential_energy(const HamiltonianModel& model, std::span<const double> q,
                        const ConditioningContext& ctx, std::size_t y);
double potential_energy(const HamiltonianModel& model, std::span<const double> q,
                        const ConditioningContext& ctx, std::string_view y);

void potential_gradient(const HamiltonianModel& model, std::span<const double> q,
                        const ConditioningContext& ctx, std::size_t y, std::span<double> out);

/// H(q, p | Y) = kinetic + U(X|Y).
double total_energy(const HamiltonianModel& model, const PhasePoint& s,
                    const ConditioningContext& ctx, std::size_t y);
double total_energy(const HamiltonianModel& model, const PhasePoint& s,
                    const ConditioningContext& ctx, std::string_view y);

}  // namespace revlab
