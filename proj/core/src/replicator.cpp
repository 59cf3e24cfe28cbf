#include "revlab/replicator.hpp"

#include "revlab/errors.hpp"
#include "revlab/parallel.hpp"
#include "revlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <nlohmann/json.hpp>

namespace revlab {

namespace {

constexpr double kBoundTolerance = 1e-12;

/// Gillespie loop; on_event(t, n_after, birth) per event, on_hold(n, t0, t1) per constant stretch.
template <class OnEvent, class OnHold>
void gillespie(const ReplicatorParams& p, double t_end, Philox4x32& rng, OnEvent on_event, OnHold on_hold) {
    std::uint64_t n = p.n0;
    double t = 0.0;
    const double total = p.g + p.delta;
    while (n > 0 && total > 0.0) {
        const double dt = exponential(rng, total * static_cast<double>(n));
        if (t + dt >= t_end) break;
        on_hold(n, t, t + dt);
        t += dt;
        const bool birth = uniform01(rng) * total < p.g;
        n = birth ? n + 1 : n - 1;
        on_event(t, n, birth);
    }
    on_hold(n, t, t_end);
}

void check_t_end(double t_end) {
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ContractViolation("t_end must be positive and finite");
}

}  // namespace

void ReplicatorParams::validate() const {
    if (!std::isfinite(g) || g < 0.0) throw ContractViolation("replicator: g must be finite and >= 0");
    if (!std::isfinite(delta) || delta < 0.0) throw ContractViolation("replicator: delta must be finite and >= 0");
    if (n0 < 1) throw ContractViolation("replicator: n0 must be >= 1");
    if (!std::isfinite(beta) || !std::isfinite(dq) || !std::isfinite(ds_int)) {
        throw ContractViolation("replicator: beta, dq and ds_int must be finite");
    }
}

void to_json(nlohmann::json& j, const ReplicatorParams& p) {
    j = {{"g", p.g}, {"delta", p.delta}, {"n0", p.n0}, {"beta", p.beta}, {"dq", p.dq}, {"ds_int", p.ds_int}};
}

std::uint64_t PopulationPath::population_at(double t) const {
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return n0;
    return sizes[static_cast<std::size_t>(it - times.begin()) - 1];
}

std::size_t PopulationPath::births() const {
    std::size_t b = 0;
    std::uint64_t prev = n0;
    for (auto n : sizes) {
        if (n > prev) ++b;
        prev = n;
    }
    return b;
}

std::size_t PopulationPath::deaths() const { return sizes.size() - births(); }

double PopulationPath::exposure() const {
    double area = 0.0;
    double t = 0.0;
    std::uint64_t n = n0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        area += static_cast<double>(n) * (times[i] - t);
        t = times[i];
        n = sizes[i];
    }
    return area + static_cast<double>(n) * (t_end - t);
}

PopulationPath simulate_population(const ReplicatorParams& params, double t_end, std::uint64_t seed,
                                   std::uint64_t stream) {
    params.validate();
    check_t_end(t_end);
    PopulationPath path;
    path.seed = seed;
    path.stream = stream;
    path.n0 = params.n0;
    path.t_end = t_end;
    Philox4x32 rng(seed, stream);
    gillespie(
        params, t_end, rng,
        [&](double t, std::uint64_t n, bool) {
            path.times.push_back(t);
            path.sizes.push_back(n);
        },
        [](std::uint64_t, double, double) {});
    return path;
}

PathSummary summarize(const PopulationPath& path, std::span<const double> checkpoints) {
    PathSummary s;
    s.births = path.births();
    s.deaths = path.deaths();
    s.exposure = path.exposure();
    for (double c : checkpoints) s.at_checkpoints.push_back(static_cast<double>(path.population_at(c)));
    return s;
}

std::vector<PathSummary> simulate_summaries(const ReplicatorParams& params, double t_end,
                                            std::span<const double> checkpoints, std::size_t n_paths,
                                            std::uint64_t seed, unsigned workers) {
    params.validate();
    check_t_end(t_end);
    if (!std::is_sorted(checkpoints.begin(), checkpoints.end())) {
        throw ContractViolation("checkpoints must be sorted");
    }
    for (double c : checkpoints) {
        if (c < 0.0 || c > t_end) throw ContractViolation("checkpoints must lie in [0, t_end]");
    }
    std::vector<PathSummary> out(n_paths);
    parallel_for(n_paths, workers, [&](std::size_t i) {
        Philox4x32 rng(seed, i);
        PathSummary& s = out[i];
        s.at_checkpoints.assign(checkpoints.size(), 0.0);
        std::size_t next = 0;
        gillespie(
            params, t_end, rng,
            [&](double, std::uint64_t, bool birth) { ++(birth ? s.births : s.deaths); },
            [&](std::uint64_t n, double t0, double t1) {
                s.exposure += static_cast<double>(n) * (t1 - t0);
                // A checkpoint c belongs to the stretch [t0, t1) (or [t0, t_end] at the end).
                while (next < checkpoints.size() && (checkpoints[next] < t1 || t1 == t_end)) {
                    if (checkpoints[next] >= t0) s.at_checkpoints[next] = static_cast<double>(n);
                    ++next;
                }
            });
    });
    return out;
}

std::vector<stats::MeanEstimate> mean_population(std::span<const PathSummary> paths) {
    if (paths.empty()) return {};
    const std::size_t k = paths.front().at_checkpoints.size();
    std::vector<stats::MeanEstimate> out;
    std::vector<double> column(paths.size());
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t i = 0; i < paths.size(); ++i) {
            if (paths[i].at_checkpoints.size() != k) throw ContractViolation("paths disagree on checkpoints");
            column[i] = paths[i].at_checkpoints[c];
        }
        out.push_back(stats::mean_estimate(column));
    }
    return out;
}

void to_json(nlohmann::json& j, const GrowthFit& f) {
    j = {{"verdict", to_string(f.verdict)},
         {"reason", f.reason},
         {"births", f.births},
         {"deaths", f.deaths},
         {"exposure", f.exposure},
         {"g_hat", f.g_hat},
         {"g_ci", {f.g_ci.lo, f.g_ci.hi}},
         {"delta_hat", f.delta_hat},
         {"delta_ci", {f.delta_ci.lo, f.delta_ci.hi}},
         {"net", f.net},
         {"net_ci", {f.net_ci.lo, f.net_ci.hi}}};
    if (f.loglinear_available) {
        j["loglinear_net"] = f.loglinear_net;
        j["loglinear_se"] = f.loglinear_se;
    }
}

GrowthFit fit_growth(std::span<const PathSummary> paths, std::span<const double> checkpoints, double confidence,
                     std::size_t min_events) {
    GrowthFit fit;
    bool enough = false;
    for (const auto& p : paths) {
        fit.births += p.births;
        fit.deaths += p.deaths;
        fit.exposure += p.exposure;
        enough = enough || p.births + p.deaths >= min_events;
    }
    if (!enough || !(fit.exposure > 0.0)) {
        fit.reason = "too few events: no path has at least " + std::to_string(min_events) + " events";
        return fit;
    }
    fit.g_hat = static_cast<double>(fit.births) / fit.exposure;
    fit.delta_hat = static_cast<double>(fit.deaths) / fit.exposure;
    fit.g_ci = stats::poisson_rate(fit.births, fit.exposure, confidence);
    fit.delta_ci = stats::poisson_rate(fit.deaths, fit.exposure, confidence);
    fit.net = fit.g_hat - fit.delta_hat;
    const double se = std::sqrt(static_cast<double>(fit.births + fit.deaths)) / fit.exposure;
    const double z = stats::normal_critical(confidence);
    fit.net_ci = {fit.net - z * se, fit.net + z * se};
    fit.verdict = Verdict::pass;

    // Weighted least squares of ln(mean n) on t, weights from the delta-method variance of the log.
    if (checkpoints.size() >= 2) {
        const auto means = mean_population(paths);
        double sw = 0, swt = 0, swy = 0, swtt = 0, swty = 0;
        std::size_t used = 0;
        for (std::size_t c = 0; c < checkpoints.size(); ++c) {
            const auto& m = means[c];
            if (!(m.mean > 0.0)) continue;
            const double var = std::pow(m.standard_error / m.mean, 2);
            const double w = var > 0.0 ? 1.0 / var : 1e12;
            const double t = checkpoints[c];
            const double y = std::log(m.mean);
            sw += w;
            swt += w * t;
            swy += w * y;
            swtt += w * t * t;
            swty += w * t * y;
            ++used;
        }
        const double det = sw * swtt - swt * swt;
        if (used >= 2 && det > 0.0) {
            fit.loglinear_net = (sw * swty - swt * swy) / det;
            fit.loglinear_se = std::sqrt(sw / det);
            fit.loglinear_available = true;
        }
    }
    return fit;
}

GrowthFit fit_growth(std::span<const PopulationPath> paths, double confidence) {
    std::vector<PathSummary> summaries;
    summaries.reserve(paths.size());
    for (const auto& p : paths) summaries.push_back(summarize(p));
    return fit_growth(summaries, {}, confidence);
}

BoundReport check_growth_bound(const ReplicatorParams& params) {
    params.validate();
    if (!(params.g > 0.0) || !(params.delta > 0.0)) {
        throw ContractViolation("growth bound needs positive rates g and delta");
    }
    BoundReport r;
    r.relation = Relation::growth_bound;
    const double ratio = params.g / params.delta;
    r.lhs = params.beta * params.dq + params.ds_int;
    r.rhs = std::log(ratio);
    r.slack = r.lhs - r.rhs;
    r.tolerance = kBoundTolerance;
    r.satisfied = r.slack >= -kBoundTolerance;
    r.inputs = {{"g", params.g},       {"delta", params.delta}, {"g_over_delta", ratio},
                {"beta", params.beta}, {"dq", params.dq},       {"ds_int", params.ds_int}};
    return r;
}

ReplicatorParams couple_to_detbal(const BoundReport& thermo, double f, double delta, std::uint64_t n0) {
    if (!(f > 0.0 && f <= 1.0)) throw ContractViolation("irreversibility factor f must lie in (0, 1]");
    if (!(delta > 0.0) || !std::isfinite(delta)) throw ContractViolation("delta must be positive");
    if (thermo.relation != Relation::entropy_equality) {
        throw ContractViolation("couple_to_detbal needs an entropy-equality report");
    }
    ReplicatorParams p;
    p.beta = thermo.inputs.at("beta");
    p.dq = thermo.inputs.at("mean_heat");
    p.ds_int = thermo.inputs.at("delta_s_int");
    p.delta = delta;
    p.n0 = n0;
    p.g = delta * f * std::exp(p.beta * p.dq + p.ds_int);
    p.validate();
    return p;
}

void write_population_csv(std::ostream& out, const PopulationPath& path) {
    out << "t,n\n";
    out.precision(17);
    out << 0.0 << ',' << path.n0 << '\n';
    for (std::size_t i = 0; i < path.times.size(); ++i) out << path.times[i] << ',' << path.sizes[i] << '\n';
    out << path.t_end << ',' << (path.sizes.empty() ? path.n0 : path.sizes.back()) << '\n';
}

}  // namespace revlab
