#include "revlab/detbal.hpp"

#include "revlab/errors.hpp"
#include "revlab/parallel.hpp"
#include "revlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

namespace revlab {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

std::string to_string(Relation r) {
    switch (r) {
        case Relation::dissipation_bound: return "dissipation_bound";
        case Relation::growth_bound: return "growth_bound";
        case Relation::overestimate_bound: return "overestimate_bound";
        case Relation::entropy_equality: return "entropy_equality";
    }
    return "unknown";
}

namespace {

struct TrajectoryOutcome {
    bool excluded = false;
    bool hit = false;
    bool escape = false;
    bool reversal_checked = false;
    bool reversal_ok = true;
    double arrival = 0.0;
};

}  // namespace

TransitionEstimate estimate_transition(const HamiltonianModel& model, const ConditioningContext& ctx,
                                       std::size_t y, const EnsembleSpec& spec, const Macrostate& to, double tau,
                                       const IntegratorSpec& integ, const SamplerConfig& cfg,
                                       const TransitionOptions& opts) {
    if (!std::holds_alternative<Microcanonical>(spec.kind) || !spec.restriction) {
        throw ContractViolation("transition estimates start from a restricted microcanonical ensemble");
    }
    const Macrostate& from = *spec.restriction;
    const auto batch = sample_microcanonical(model, ctx, y, spec, cfg);

    TransitionEstimate est;
    est.from = from.label();
    est.to = to.label();
    est.tau = tau;
    est.n_sampled = batch.points.size();

    std::vector<TrajectoryOutcome> outcomes(batch.points.size());
    parallel_for(batch.points.size(), cfg.workers, [&](std::size_t i) {
        auto& out = outcomes[i];
        Trajectory traj;
        try {
            traj = evolve(model, ctx, y, batch.points[i], tau, integ);
        } catch (const IntegrationError&) {
            out.excluded = true;
            return;
        }
        if (!traj.valid) {
            out.excluded = true;
            return;
        }
        const auto q = traj.final.q();
        out.hit = to.contains(q);
        out.escape = !out.hit && !from.contains(q);
        if (out.hit) {
            out.arrival = q[0];
            if (opts.check_reversal) {
                out.reversal_checked = true;
                try {
                    const auto back = evolve(model, ctx, y, time_reverse(traj.final), tau, integ);
                    out.reversal_ok = from.contains(back.final.q());
                } catch (const IntegrationError&) {
                    out.reversal_ok = false;
                }
            }
        }
    });

    std::vector<double> indicator;
    for (const auto& o : outcomes) {
        if (o.excluded) {
            ++est.n_excluded_drift;
            continue;
        }
        ++est.n_trajectories;
        indicator.push_back(o.hit ? 1.0 : 0.0);
        if (o.hit) {
            ++est.n_hits;
            est.arrivals.push_back(o.arrival);
        }
        if (o.escape) ++est.n_escapes;
        if (o.reversal_checked) {
            ++est.reversal_checked;
            if (!o.reversal_ok) ++est.reversal_failures;
        }
    }
    if (est.n_trajectories == 0) {
        throw EstimationError("no valid trajectories: all " + std::to_string(est.n_sampled) +
                              " runs exceeded the energy-drift threshold");
    }
    const double n = static_cast<double>(est.n_trajectories);
    const double k = static_cast<double>(est.n_hits);
    est.pi_hat = k / n;
    const double iat = std::max(1.0, stats::integrated_autocorrelation_time(indicator));
    est.effective_trajectories = n / iat;
    est.ci = iat == 1.0 ? stats::clopper_pearson(est.n_hits, est.n_trajectories, opts.confidence)
                        : stats::clopper_pearson_effective(k / iat, n / iat, opts.confidence);

    if (opts.compute_mixing) {
        SamplerConfig ref_cfg = cfg;
        ref_cfg.stream_base = cfg.stream_base + cfg.n_chains;
        EnsembleSpec ref_spec = spec;
        ref_spec.restriction = to;
        const auto reference = sample_microcanonical(model, ctx, y, ref_spec, ref_cfg);
        est.mixing = mixing_diagnostic(est.arrivals, reference, opts.mixing_bins, opts.min_arrivals);
    }
    return est;
}

MixingResult mixing_diagnostic(std::span<const double> arrivals, const SampleBatch& reference, std::size_t bins,
                               std::size_t min_arrivals) {
    if (bins == 0) throw ContractViolation("mixing diagnostic needs at least one bin");
    if (reference.points.empty()) throw ContractViolation("mixing diagnostic needs a reference sample");
    MixingResult out;
    out.arrivals = arrivals.size();
    if (arrivals.size() < min_arrivals) return out;
    const auto ref = reference.reaction_coordinates();
    const auto [lo, hi] = std::minmax_element(ref.begin(), ref.end());
    const double pad = *hi > *lo ? 1e-9 * (*hi - *lo) : 0.5;
    const stats::Binning binning{*lo - pad, *hi + pad, bins};
    out.distance = stats::total_variation(stats::histogram(arrivals, binning), stats::histogram(ref, binning));
    return out;
}

RatioIdentityReport verify_ratio_identity(const HamiltonianModel& model, const ConditioningContext& ctx,
                                          std::size_t y, double energy, double width, const Macrostate& m_i,
                                          const Macrostate& m_ii, double tau, const IntegratorSpec& integ,
                                          const SamplerConfig& transition_cfg, const SamplerConfig& volume_cfg,
                                          const TransitionOptions& opts) {
    RatioIdentityReport rep;
    if (m_i == m_ii) {
        rep.verdict = Verdict::pass;
        rep.reason = "identical macrostates";
        VolumeRatio v;
        v.identical_regions = true;
        rep.volume = v;
        return rep;
    }
    rep.forward = estimate_transition(model, ctx, y, EnsembleSpec::microcanonical(energy, width, m_i), m_ii, tau,
                                      integ, transition_cfg, opts);
    SamplerConfig rev_cfg = transition_cfg;
    rev_cfg.stream_base = transition_cfg.stream_base + 2 * transition_cfg.n_chains;
    rep.reverse = estimate_transition(model, ctx, y, EnsembleSpec::microcanonical(energy, width, m_ii), m_i, tau,
                                      integ, rev_cfg, opts);
    if (rep.forward->n_hits == 0 || rep.reverse->n_hits == 0) {
        rep.reason = "zero hits in one direction";
        return rep;
    }
    rep.pi_ratio = rep.reverse->pi_hat / rep.forward->pi_hat;
    rep.pi_ratio_ci = {rep.reverse->ci.lo / rep.forward->ci.hi, rep.reverse->ci.hi / rep.forward->ci.lo};
    try {
        rep.volume = volume_ratio_on_shell(model, ctx, y, EnsembleSpec::microcanonical(energy, width), m_i, m_ii,
                                           volume_cfg, 100, opts.confidence);
    } catch (const SamplingError& e) {
        if (e.kind() != SamplingError::Kind::insufficient_exchange) throw;
        rep.reason = e.what();
        return rep;
    }
    const bool overlap = rep.pi_ratio_ci.overlaps(rep.volume->ci);
    rep.verdict = overlap ? Verdict::pass : Verdict::fail;
    rep.reason = overlap ? "intervals overlap" : "intervals disjoint";
    return rep;
}

void to_json(nlohmann::json& j, const BoundReport& r) {
    j = nlohmann::json{{"relation", to_string(r.relation)},
                       {"lhs", r.lhs},
                       {"rhs", r.rhs},
                       {"slack", r.slack},
                       {"error", r.error},
                       {"tolerance", r.tolerance},
                       {"satisfied", r.satisfied},
                       {"inputs", r.inputs}};
    if (r.overestimate_margin) j["overestimate_margin"] = *r.overestimate_margin;
}

BoundReport verify_entropy_equality(const ConditioningContext& ctx, double beta, const StateSpec& s_i,
                                    const StateSpec& s_ii, const ThermoOptions& opts, double tolerance) {
    check_same_kinetic_form(s_i.model, s_ii.model);
    const auto t1 = entropy(s_i.model, ctx, beta, s_i.macrostate, opts);
    const auto t2 = entropy(s_ii.model, ctx, beta, s_ii.macrostate, opts);
    BoundReport r;
    r.relation = Relation::entropy_equality;
    const double ds = t2.entropy - t1.entropy;
    const double dq = t1.mean_u - t2.mean_u;
    r.lhs = std::log(t1.z) - std::log(t2.z);
    r.rhs = -ds - beta * dq;
    r.slack = r.lhs - r.rhs;
    if (t1.method == EstimationMethod::monte_carlo || t2.method == EstimationMethod::monte_carlo) {
        r.error = t1.z_error / t1.z + t2.z_error / t2.z + t1.entropy_error + t2.entropy_error +
                  beta * (t1.mean_u_error + t2.mean_u_error);
    }
    r.tolerance = tolerance;
    r.satisfied = std::abs(r.slack) <= tolerance + r.error;
    r.inputs = {{"beta", beta},         {"z_i", t1.z},          {"z_ii", t2.z},
                {"s_i", t1.entropy},    {"s_ii", t2.entropy},   {"delta_s_int", ds},
                {"mean_heat", dq},      {"mean_u_i", t1.mean_u}, {"mean_u_ii", t2.mean_u}};
    return r;
}

BoundReport verify_entropy_equality(const HamiltonianModel& model, const ConditioningContext& ctx, double beta,
                                    const Macrostate& m_i, const Macrostate& m_ii, const ThermoOptions& opts,
                                    double tolerance) {
    return verify_entropy_equality(ctx, beta, {model, m_i}, {model, m_ii}, opts, tolerance);
}

namespace {

void check_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw ContractViolation(std::string(what) + " must be finite");
}

BoundReport bound(Relation rel, double beta, double mean_heat, double delta_s_int, double pi_fwd, double pi_rev,
                  double error, double tolerance) {
    BoundReport r;
    r.relation = rel;
    r.lhs = beta * mean_heat + std::log(pi_rev / pi_fwd) + delta_s_int;
    r.rhs = 0.0;
    r.slack = r.lhs - r.rhs;
    r.error = error;
    r.tolerance = tolerance;
    r.satisfied = r.slack >= -(error + tolerance);
    r.inputs = {{"beta", beta}, {"mean_heat", mean_heat}, {"delta_s_int", delta_s_int}, {"pi_fwd", pi_fwd}};
    return r;
}

}  // namespace

BoundReport check_england_bound(double beta, double mean_heat, double delta_s_int, double pi_fwd, double pi_rev,
                                double error, double tolerance) {
    check_finite(beta, "beta");
    check_finite(mean_heat, "mean heat");
    check_finite(delta_s_int, "entropy change");
    if (pi_fwd == 0.0) throw ContractViolation("forward probability is zero: the ratio is undefined");
    if (!(pi_fwd > 0.0 && pi_fwd <= 1.0) || !(pi_rev > 0.0 && pi_rev <= 1.0)) {
        throw ContractViolation("transition probabilities must lie in (0, 1]");
    }
    auto r = bound(Relation::dissipation_bound, beta, mean_heat, delta_s_int, pi_fwd, pi_rev, error, tolerance);
    r.inputs["pi_rev"] = pi_rev;
    return r;
}

BoundReport check_ruelle_bound(double beta, double mean_heat, double delta_s_int, double pi_fwd,
                               double pi_star_rev, std::optional<double> pi_true_rev, double error,
                               double tolerance) {
    check_finite(beta, "beta");
    check_finite(mean_heat, "mean heat");
    check_finite(delta_s_int, "entropy change");
    if (pi_fwd == 0.0) throw ContractViolation("forward probability is zero: the ratio is undefined");
    if (!(pi_fwd > 0.0 && pi_fwd <= 1.0)) throw ContractViolation("forward probability must lie in (0, 1]");
    if (!(pi_star_rev >= 0.0) || !std::isfinite(pi_star_rev)) {
        throw ContractViolation("reverse overestimate must be a finite value >= 0");
    }
    if (pi_true_rev && pi_star_rev < *pi_true_rev) {
        throw OverestimateViolation("pi* = " + std::to_string(pi_star_rev) + " undercuts the true reverse probability " +
                                    std::to_string(*pi_true_rev));
    }
    auto r = bound(Relation::overestimate_bound, beta, mean_heat, delta_s_int, pi_fwd, pi_star_rev, error, tolerance);
    r.inputs["pi_star_rev"] = pi_star_rev;
    if (pi_true_rev) {
        r.inputs["pi_true_rev"] = *pi_true_rev;
        r.overestimate_margin = std::log(pi_star_rev / *pi_true_rev);
    }
    return r;
}

std::pair<double, double> probabilities_with_ratio(double ratio) {
    if (!(ratio > 0.0) || !std::isfinite(ratio)) throw ContractViolation("probability ratio must be positive");
    const double fwd = 0.5 / std::max(1.0, ratio);
    return {fwd, ratio * fwd};
}

namespace {

struct BatchStats {
    double mean = 0.0;
    double se = 0.0;
};

/// Means of contiguous blocks [k n / B, (k+1) n / B).
std::vector<double> block_means(std::span<const double> xs, std::size_t blocks) {
    std::vector<double> out(blocks, 0.0);
    const std::size_t n = xs.size();
    for (std::size_t k = 0; k < blocks; ++k) {
        const std::size_t a = k * n / blocks;
        const std::size_t b = (k + 1) * n / blocks;
        double s = 0.0;
        for (std::size_t i = a; i < b; ++i) s += xs[i];
        out[k] = s / static_cast<double>(b - a);
    }
    return out;
}

BatchStats spread(const std::vector<double>& means, double centre) {
    BatchStats st;
    st.mean = centre;
    if (means.size() < 2) return st;
    double ss = 0.0;
    for (double m : means) ss += (m - centre) * (m - centre);
    st.se = std::sqrt(ss / static_cast<double>(means.size() - 1) / static_cast<double>(means.size()));
    return st;
}

double mean_of(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

}  // namespace

AsymmetricAverage jensen_gap_from_samples(std::span<const double> g, const AsymmetricOptions& opts) {
    if (g.empty()) throw ContractViolation("Jensen gap needs at least one sample");
    if (opts.batches == 0) throw ContractViolation("batch count must be positive");
    AsymmetricAverage out;
    out.samples = g.size();
    out.constant_g = std::all_of(g.begin(), g.end(), [&](double x) { return x == g.front(); });
    if (out.constant_g) {
        out.mean_g = g.front();
        out.exp_mean_g = out.mean_exp_g = std::exp(g.front());
        out.mean_g_ci = {out.mean_g, out.mean_g};
        out.mean_exp_g_ci = out.exp_mean_g_ci = {out.mean_exp_g, out.mean_exp_g};
        out.gap = 0.0;
        out.gap_ci = {0.0, 0.0};
        return out;
    }
    std::vector<double> eg(g.size());
    std::transform(g.begin(), g.end(), eg.begin(), [](double x) { return std::exp(x); });
    out.mean_g = mean_of(g);
    out.mean_exp_g = mean_of(eg);
    out.exp_mean_g = std::exp(out.mean_g);
    out.gap = out.mean_exp_g - out.exp_mean_g;

    const std::size_t blocks = std::min(opts.batches, g.size());
    const auto bg = block_means(g, blocks);
    const auto be = block_means(eg, blocks);
    // Delta method on block means: d(gap) = dA - exp(G) dG.
    std::vector<double> bd(blocks);
    for (std::size_t k = 0; k < blocks; ++k) bd[k] = be[k] - out.exp_mean_g * bg[k];
    const auto sg = spread(bg, out.mean_g);
    const auto se = spread(be, out.mean_exp_g);
    const auto sd = spread(bd, mean_of(bd));
    double crit = stats::normal_critical(opts.confidence);
    if (blocks >= 2) {
        boost::math::students_t t(static_cast<double>(blocks - 1));
        crit = boost::math::quantile(boost::math::complement(t, 0.5 * (1.0 - opts.confidence)));
    }
    out.mean_g_ci = {out.mean_g - crit * sg.se, out.mean_g + crit * sg.se};
    out.mean_exp_g_ci = {out.mean_exp_g - crit * se.se, out.mean_exp_g + crit * se.se};
    out.exp_mean_g_ci = {std::exp(out.mean_g_ci.lo), std::exp(out.mean_g_ci.hi)};
    out.gap_ci = {out.gap - crit * sd.se, out.gap + crit * sd.se};
    return out;
}

AsymmetricAverage asymmetric_average_F(const ConditioningContext& ctx, double beta, const StateSpec& s_i,
                                       const StateSpec& s_ii, const SamplerConfig& cfg,
                                       const AsymmetricOptions& opts) {
    check_same_kinetic_form(s_i.model, s_ii.model);
    const std::size_t dim = s_i.model.dim();
    for (const auto* s : {&s_i, &s_ii}) {
        for (const auto& sub : s->macrostate.substates()) {
            if (!sub.bounded(dim)) {
                throw ContractViolation("the uniform inner average needs bounded substates; '" + sub.label() +
                                        "' is unbounded");
            }
        }
    }
    const double vol_i = s_i.macrostate.volume(dim);
    const double vol_ii = s_ii.macrostate.volume(dim);
    const double log_ratio = std::log(vol_i) - std::log(vol_ii);

    const auto outer = sample_canonical(s_ii.model, ctx, EnsembleSpec::canonical(beta, s_ii.macrostate), cfg);
    Philox4x32 rng(cfg.seed, cfg.stream_base + cfg.n_chains);
    const auto& subs = s_i.macrostate.substates();
    std::vector<double> g(outer.points.size());
    std::vector<double> xi(dim);
    double sum_u_i = 0.0;
    double sum_u_ii = 0.0;
    for (std::size_t k = 0; k < outer.points.size(); ++k) {
        double pick = uniform01(rng) * vol_i;
        std::size_t which = 0;
        for (; which + 1 < subs.size(); ++which) {
            pick -= subs[which].volume(dim);
            if (pick < 0.0) break;
        }
        for (std::size_t c = 0; c < dim; ++c) {
            const auto b = subs[which].bound_on(c);
            xi[c] = b.lo + (b.hi - b.lo) * uniform01(rng);
        }
        const std::size_t yy = outer.y[k];
        const double u_i = potential_energy(s_i.model, xi, ctx, yy);
        const double u_ii = potential_energy(s_ii.model, outer.points[k].q(), ctx, yy);
        sum_u_i += u_i;
        sum_u_ii += u_ii;
        g[k] = log_ratio - beta * (u_i - u_ii);
    }
    auto out = jensen_gap_from_samples(g, opts);
    out.log_volume_i = std::log(vol_i);
    out.log_volume_ii = std::log(vol_ii);
    out.mean_heat = (sum_u_i - sum_u_ii) / static_cast<double>(g.size());
    return out;
}

JensenGap jensen_gap(const ConditioningContext& ctx, double beta, const StateSpec& s_i, const StateSpec& s_ii,
                     const SamplerConfig& cfg, const AsymmetricOptions& opts) {
    const auto a = asymmetric_average_F(ctx, beta, s_i, s_ii, cfg, opts);
    return {a.gap, a.gap_ci, a.constant_g};
}

}  // namespace revlab
