#include "revlab/states.hpp"

#include "revlab/errors.hpp"
#include "revlab/quadrature.hpp"
#include "revlab/rng.hpp"
#include "revlab/stats.hpp"

#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

namespace revlab {
namespace {

EstimationMethod pick_method(const HamiltonianModel& model, const ThermoOptions& opts) {
    if (opts.method) {
        if (*opts.method == EstimationMethod::quadrature && model.dim() > 2) {
            throw ContractViolation("quadrature path needs configuration dimension <= 2");
        }
        return *opts.method;
    }
    return model.dim() <= 2 ? EstimationMethod::quadrature : EstimationMethod::monte_carlo;
}

void check_beta(double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ContractViolation("beta must be positive");
}

/// Re-throws a quadrature failure with the offending substate named.
template <typename Fn>
auto named(const Region& r, Fn&& fn) {
    try {
        return fn();
    } catch (const QuadratureError& e) {
        throw QuadratureError(e.lower(), e.upper(), e.error_estimate(),
                              "substate '" + r.label() + "': " + e.what());
    }
}

ThermoReport quadrature_thermo(const HamiltonianModel& model, const ConditioningContext& ctx, double beta,
                               const Macrostate& m, double tol) {
    ThermoReport r;
    r.method = EstimationMethod::quadrature;
    r.tolerance = tol;
    double weighted_u = 0.0;
    double weighted_u_err = 0.0;
    for (std::size_t y = 0; y < ctx.size(); ++y) {
        const double w = ctx[y].weight;
        BoundaryThermo bt{ctx[y].label, w, 0.0, 0.0};
        double a_y = 0.0;
        for (const auto& sub : m.substates()) {
            const auto z = named(sub, [&] {
                return integrate_region(
                    model, sub, [&](std::span<const double> q) { return std::exp(-beta * potential_energy(model, q, ctx, y)); },
                    tol);
            });
            const auto a = named(sub, [&] {
                return integrate_region(
                    model, sub,
                    [&](std::span<const double> q) {
                        const double u = potential_energy(model, q, ctx, y);
                        return u * std::exp(-beta * u);
                    },
                    tol);
            });
            bt.z += z.value;
            a_y += a.value;
            if (w > 0.0) {
                r.z_error += w * z.error;
                weighted_u_err += w * a.error;
            }
        }
        bt.mean_u = bt.z > 0.0 ? a_y / bt.z : 0.0;
        r.z += w * bt.z;
        weighted_u += w * a_y;
        r.per_y.push_back(bt);
    }
    if (!(r.z > 0.0)) throw ContractViolation("macrostate '" + m.label() + "' has zero partition function");
    r.mean_u = weighted_u / r.z;
    r.mean_u_error = (weighted_u_err + std::abs(r.mean_u) * r.z_error) / r.z;

    // Direct route: rho_Y(X) = exp(-beta U(X|Y)) / Z, S = -sum_Y w_Y int rho_Y ln rho_Y dX.
    double s_direct = 0.0;
    double s_err = 0.0;
    const double z_total = r.z;
    for (std::size_t y = 0; y < ctx.size(); ++y) {
        const double w = ctx[y].weight;
        if (w == 0.0) continue;
        for (const auto& sub : m.substates()) {
            const auto part = named(sub, [&] {
                return integrate_region(
                    model, sub,
                    [&](std::span<const double> q) {
                        const double rho = std::exp(-beta * potential_energy(model, q, ctx, y)) / z_total;
                        return rho > 0.0 ? -rho * std::log(rho) : 0.0;
                    },
                    tol);
            });
            s_direct += w * part.value;
            s_err += w * part.error;
        }
    }
    r.entropy = s_direct;
    r.entropy_identity = std::log(r.z) + beta * r.mean_u;
    r.entropy_discrepancy = r.entropy - r.entropy_identity;
    r.entropy_error = s_err + r.z_error / r.z + beta * r.mean_u_error;
    return r;
}

/// Importance sampler: uniform on bounded reaction intervals, (half-)Gaussian otherwise; bath
/// coordinates from their conditional Gaussian given q.
ThermoReport monte_carlo_thermo(const HamiltonianModel& model, const ConditioningContext& ctx, double beta,
                                const Macrostate& m, const ThermoOptions& opts) {
    if (opts.mc_samples < 2) throw ContractViolation("Monte Carlo path needs at least two samples");
    const std::size_t dim = model.dim();
    const double sigma = opts.mc_reaction_scale;
    const double z_crit = stats::normal_critical(opts.confidence);

    ThermoReport r;
    r.method = EstimationMethod::monte_carlo;
    r.seed = opts.seed;
    r.mc_samples = opts.mc_samples;

    struct Draw {
        double weight;  // w_Y * theta * exp(-beta U) / g
        double u;
        double log_boltzmann;  // -beta U
    };
    std::vector<Draw> draws;
    std::uint64_t stream = 0;
    for (std::size_t y = 0; y < ctx.size(); ++y) {
        BoundaryThermo bt{ctx[y].label, ctx[y].weight, 0.0, 0.0};
        double y_w = 0.0;
        double y_wu = 0.0;
        for (const auto& sub : m.substates()) {
            Philox4x32 rng(opts.seed, stream++);
            const auto b = sub.bound_on(0);
            double sub_w = 0.0;
            for (std::size_t n = 0; n < opts.mc_samples; ++n) {
                std::vector<double> x(dim);
                double log_g = 0.0;
                if (std::isfinite(b.lo) && std::isfinite(b.hi)) {
                    x[0] = b.lo + (b.hi - b.lo) * uniform01(rng);
                    log_g = -std::log(b.hi - b.lo);
                } else {
                    const double z = standard_normal(rng);
                    if (std::isfinite(b.lo)) x[0] = b.lo + sigma * std::abs(z);
                    else if (std::isfinite(b.hi)) x[0] = b.hi - sigma * std::abs(z);
                    else x[0] = sigma * z;
                    const bool half = std::isfinite(b.lo) || std::isfinite(b.hi);
                    log_g = -0.5 * z * z - std::log(sigma * std::sqrt(2.0 * std::numbers::pi)) + (half ? std::log(2.0) : 0.0);
                }
                for (std::size_t i = 0; i < model.bath().size(); ++i) {
                    const auto& mode = model.bath()[i];
                    const double w2 = mode.frequency * mode.frequency;
                    const double s = 1.0 / std::sqrt(beta * w2);
                    const double z = standard_normal(rng);
                    x[i + 1] = mode.coupling * x[0] / w2 + s * z;
                    log_g += -0.5 * z * z - std::log(s * std::sqrt(2.0 * std::numbers::pi));
                }
                const double u = potential_energy(model, x, ctx, y);
                const bool inside = sub.contains(x) && std::isfinite(u);
                const double wt = inside ? ctx[y].weight * std::exp(-beta * u - log_g) : 0.0;
                draws.push_back({wt, inside ? u : 0.0, -beta * u});
                sub_w += inside ? std::exp(-beta * u - log_g) : 0.0;
                y_wu += inside ? std::exp(-beta * u - log_g) * u : 0.0;
            }
            bt.z += sub_w / static_cast<double>(opts.mc_samples);
        }
        y_w = bt.z * static_cast<double>(opts.mc_samples);
        bt.mean_u = y_w > 0.0 ? y_wu / y_w : 0.0;
        r.per_y.push_back(bt);
    }

    // Each (Y, substate) block holds mc_samples draws; Z is the sum of block means.
    const double n = static_cast<double>(opts.mc_samples);
    double z = 0.0;
    double var_z = 0.0;
    double sum_w = 0.0;
    double sum_wu = 0.0;
    for (std::size_t block = 0; block * opts.mc_samples < draws.size(); ++block) {
        double mean = 0.0;
        for (std::size_t k = 0; k < opts.mc_samples; ++k) mean += draws[block * opts.mc_samples + k].weight;
        mean /= n;
        double ss = 0.0;
        for (std::size_t k = 0; k < opts.mc_samples; ++k) {
            const double d = draws[block * opts.mc_samples + k].weight - mean;
            ss += d * d;
        }
        z += mean;
        var_z += ss / (n - 1.0) / n;
    }
    for (const auto& d : draws) {
        sum_w += d.weight;
        sum_wu += d.weight * d.u;
    }
    if (!(z > 0.0)) throw ContractViolation("macrostate '" + m.label() + "' has zero estimated partition function");
    r.z = z;
    r.z_error = z_crit * std::sqrt(var_z);
    r.mean_u = sum_wu / sum_w;
    double ss_u = 0.0;
    double s_direct = 0.0;
    for (const auto& d : draws) {
        if (d.weight == 0.0) continue;
        ss_u += d.weight * d.weight * (d.u - r.mean_u) * (d.u - r.mean_u);
        const double log_rho = d.log_boltzmann - std::log(z);
        s_direct -= d.weight * log_rho;
    }
    r.mean_u_error = z_crit * std::sqrt(ss_u) / sum_w;
    r.entropy = s_direct / sum_w;
    r.entropy_identity = std::log(r.z) + beta * r.mean_u;
    r.entropy_discrepancy = r.entropy - r.entropy_identity;
    r.entropy_error = std::hypot(r.z_error / r.z, beta * r.mean_u_error);
    return r;
}

}  // namespace

void to_json(nlohmann::json& j, const ThermoReport& r) {
    j = nlohmann::json{
        {"macrostate", r.macrostate},
        {"beta", r.beta},
        {"Z", r.z},
        {"Z_error", r.z_error},
        {"S", r.entropy},
        {"S_identity", r.entropy_identity},
        {"S_discrepancy", r.entropy_discrepancy},
        {"S_error", r.entropy_error},
        {"mean_U", r.mean_u},
        {"mean_U_error", r.mean_u_error},
        {"method", r.method == EstimationMethod::quadrature ? "quadrature" : "monte_carlo"},
        {"provenance", {{"tolerance", r.tolerance}, {"seed", r.seed}, {"mc_samples", r.mc_samples}}},
    };
    auto& per_y = j["per_y"] = nlohmann::json::array();
    for (const auto& b : r.per_y) {
        per_y.push_back({{"label", b.label}, {"weight", b.weight}, {"Z", b.z}, {"mean_U", b.mean_u}});
    }
}

ThermoReport entropy(const HamiltonianModel& model, const ConditioningContext& ctx, double beta,
                     const Macrostate& m, const ThermoOptions& opts) {
    check_beta(beta);
    ThermoReport r = pick_method(model, opts) == EstimationMethod::quadrature
                         ? quadrature_thermo(model, ctx, beta, m, opts.abs_tol)
                         : monte_carlo_thermo(model, ctx, beta, m, opts);
    r.macrostate = m.label();
    r.beta = beta;
    return r;
}

Estimate restricted_partition_function(const HamiltonianModel& model, const ConditioningContext& ctx,
                                       double beta, const Macrostate& m, const ThermoOptions& opts) {
    check_beta(beta);
    if (pick_method(model, opts) == EstimationMethod::quadrature) {
        Estimate z;
        for (std::size_t y = 0; y < ctx.size(); ++y) {
            const double w = ctx[y].weight;
            if (w == 0.0) continue;
            for (const auto& sub : m.substates()) {
                const auto part = named(sub, [&] {
                    return integrate_region(
                        model, sub,
                        [&](std::span<const double> q) { return std::exp(-beta * potential_energy(model, q, ctx, y)); },
                        opts.abs_tol);
                });
                z.value += w * part.value;
                z.error += w * part.error;
            }
        }
        return z;
    }
    const auto r = entropy(model, ctx, beta, m, opts);
    return {r.z, r.z_error};
}

Estimate delta_s_int(const HamiltonianModel& model, const ConditioningContext& ctx, double beta,
                     const Macrostate& m_i, const Macrostate& m_ii, const ThermoOptions& opts) {
    return delta_s_int(ctx, beta, {model, m_i}, {model, m_ii}, opts);
}

Estimate mean_heat_released(const HamiltonianModel& model, const ConditioningContext& ctx, double beta,
                            const Macrostate& m_i, const Macrostate& m_ii, const ThermoOptions& opts) {
    return mean_heat_released(ctx, beta, {model, m_i}, {model, m_ii}, opts);
}

void check_same_kinetic_form(const HamiltonianModel& a, const HamiltonianModel& b) {
    bool same = a.dim() == b.dim();
    for (std::size_t i = 0; same && i < a.dim(); ++i) same = a.mass(i) == b.mass(i);
    if (!same) throw ContractViolation("macrostates must share one kinetic form (dimension and masses)");
}

Estimate delta_s_int(const ConditioningContext& ctx, double beta, const StateSpec& s_i, const StateSpec& s_ii,
                     const ThermoOptions& opts) {
    check_same_kinetic_form(s_i.model, s_ii.model);
    const auto s1 = entropy(s_i.model, ctx, beta, s_i.macrostate, opts);
    const auto s2 = entropy(s_ii.model, ctx, beta, s_ii.macrostate, opts);
    return {s2.entropy - s1.entropy, s1.entropy_error + s2.entropy_error};
}

Estimate mean_heat_released(const ConditioningContext& ctx, double beta, const StateSpec& s_i,
                            const StateSpec& s_ii, const ThermoOptions& opts) {
    check_same_kinetic_form(s_i.model, s_ii.model);
    const auto s1 = entropy(s_i.model, ctx, beta, s_i.macrostate, opts);
    const auto s2 = entropy(s_ii.model, ctx, beta, s_ii.macrostate, opts);
    return {s1.mean_u - s2.mean_u, s1.mean_u_error + s2.mean_u_error};
}

double momentum_partition_factor(const HamiltonianModel& model, double beta) {
    check_beta(beta);
    double f = 1.0;
    for (std::size_t i = 0; i < model.dim(); ++i) f *= std::sqrt(2.0 * std::numbers::pi * model.mass(i) / beta);
    return f;
}

}  // namespace revlab
