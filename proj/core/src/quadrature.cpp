#include "revlab/quadrature.hpp"

#include "revlab/errors.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace revlab {
namespace {

constexpr unsigned kMaxDepth = 18;
constexpr double kRelTol = 1e-14;
// The inner integral of a 2-D region runs once per outer node, so it gets a shallower budget.
constexpr unsigned kInnerMaxDepth = 8;
constexpr double kInnerRelTol = 1e-13;
constexpr unsigned kOuterMaxDepth2d = 10;
constexpr double kOuterRelTol2d = 1e-12;

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 31>;

struct Piece {
    double lo;
    double hi;
};

/// Pieces of [lo, hi) on the reaction coordinate on which the potential is smooth and finite.
std::vector<Piece> smooth_pieces(const PotentialSpec& potential, double lo, double hi) {
    std::vector<double> cuts{lo};
    for (double b : potential.breakpoints()) {
        if (b > lo && b < hi) cuts.push_back(b);
    }
    cuts.push_back(hi);
    std::vector<Piece> pieces;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i];
        const double b = cuts[i + 1];
        double probe;
        if (std::isfinite(a) && std::isfinite(b)) probe = 0.5 * (a + b);
        else if (std::isfinite(a)) probe = a + 1.0;
        else if (std::isfinite(b)) probe = b - 1.0;
        else probe = 0.0;
        if (potential.is_flat() && !std::isfinite(potential.value(probe))) continue;
        pieces.push_back({a, b});
    }
    return pieces;
}

[[noreturn]] void fail(double lo, double hi, double err, double tol) {
    std::ostringstream os;
    os << "quadrature did not converge on [" << lo << ", " << hi << "): error estimate " << err
       << " exceeds tolerance " << tol;
    throw QuadratureError(lo, hi, err, os.str());
}

}  // namespace

QuadratureResult integrate_region(const HamiltonianModel& model, const Region& region,
                                  const ConfigIntegrand& f, double abs_tol) {
    const std::size_t dim = model.dim();
    if (dim > 2) throw ContractViolation("quadrature path supports configuration dimension <= 2");
    const auto outer = region.bound_on(0);
    const auto inner = region.bound_on(1);

    QuadratureResult total;
    for (const auto& piece : smooth_pieces(model.reaction_potential(), outer.lo, outer.hi)) {
        double err = 0.0;
        double value = 0.0;
        if (dim == 1) {
            auto g = [&](double q) {
                const std::array<double, 1> x{q};
                return f(x);
            };
            value = Kronrod::integrate(g, piece.lo, piece.hi, kMaxDepth, kRelTol, &err);
        } else {
            double inner_err_max = 0.0;
            auto g = [&](double q) {
                double e = 0.0;
                auto h = [&](double xb) {
                    const std::array<double, 2> x{q, xb};
                    return f(x);
                };
                const double v = Kronrod::integrate(h, inner.lo, inner.hi, kInnerMaxDepth, kInnerRelTol, &e);
                inner_err_max = std::max(inner_err_max, e);
                return v;
            };
            value = Kronrod::integrate(g, piece.lo, piece.hi, kOuterMaxDepth2d, kOuterRelTol2d, &err);
            // Inner errors integrate over the outer range; bound that range by the mass of the
            // outer integrand's support.
            const double width = std::isfinite(piece.hi - piece.lo) ? piece.hi - piece.lo : 1.0;
            err += inner_err_max * std::min(width, 1e3);
        }
        if (!std::isfinite(value) || !(err <= abs_tol)) fail(piece.lo, piece.hi, err, abs_tol);
        total.value += value;
        total.error += err;
    }
    if (total.error > abs_tol) fail(outer.lo, outer.hi, total.error, abs_tol);
    return total;
}

}  // namespace revlab
