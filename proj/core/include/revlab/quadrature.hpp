#pragma once

#include "revlab/model.hpp"
#include "revlab/region.hpp"

#include <functional>
#include <span>

namespace revlab {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;  ///< absolute error estimate
};

/// Integrand over configuration space; receives the full configuration vector.
using ConfigIntegrand = std::function<double(std::span<const double>)>;

/// Adaptive Gauss-Kronrod integral of f over a region of a model with dim() <= 2.
///
/// The reaction-coordinate range is split at the potential's breakpoints, pieces where the
/// potential is infinite are skipped, and the second coordinate (if any) is integrated as an
/// inner adaptive integral. Throws QuadratureError if the error estimate exceeds abs_tol and
/// ContractViolation for dim() > 2.
QuadratureResult integrate_region(const HamiltonianModel& model, const Region& region,
                                  const ConfigIntegrand& f, double abs_tol = 1e-10);

}  // namespace revlab
