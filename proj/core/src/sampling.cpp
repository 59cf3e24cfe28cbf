#include "revlab/sampling.hpp"

#include "revlab/errors.hpp"
#include "revlab/parallel.hpp"
#include "revlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace revlab {

EnsembleSpec EnsembleSpec::microcanonical(double energy, double width, std::optional<Macrostate> restriction) {
    return EnsembleSpec{Microcanonical{energy, width}, std::move(restriction)};
}

EnsembleSpec EnsembleSpec::canonical(double beta, std::optional<Macrostate> restriction) {
    return EnsembleSpec{Canonical{beta}, std::move(restriction)};
}

void validate(const EnsembleSpec& spec) {
    if (const auto* m = std::get_if<Microcanonical>(&spec.kind)) {
        if (!std::isfinite(m->energy) || !(m->width > 0.0) || !std::isfinite(m->width)) {
            throw ContractViolation("microcanonical ensemble needs finite E and shell width > 0");
        }
    } else {
        const double beta = std::get<Canonical>(spec.kind).beta;
        if (!(beta > 0.0) || !std::isfinite(beta)) throw ContractViolation("canonical ensemble needs beta > 0");
    }
}

void validate(const SamplerConfig& cfg) {
    if (cfg.n_samples == 0) throw ContractViolation("sampler needs n_samples > 0");
    if (cfg.thinning == 0) throw ContractViolation("sampler needs thinning >= 1");
    if (cfg.n_chains == 0) throw ContractViolation("sampler needs at least one chain");
    if (cfg.proposal_scale.empty()) throw ContractViolation("sampler needs a proposal scale");
    for (double s : cfg.proposal_scale) {
        if (!(s > 0.0) || !std::isfinite(s)) throw ContractViolation("proposal scales must be > 0");
    }
    if (!(cfg.swap_probability >= 0.0 && cfg.swap_probability <= 1.0)) {
        throw ContractViolation("swap probability must lie in [0, 1]");
    }
    if (!(cfg.y_move_probability >= 0.0 && cfg.y_move_probability < 1.0)) {
        throw ContractViolation("boundary-move probability must lie in [0, 1)");
    }
    for (auto m : cfg.swap_moves) {
        if (m == SwapMove::flow && (!(cfg.flow_dt > 0.0) || !(cfg.flow_time >= cfg.flow_dt))) {
            throw ContractViolation("flow moves need 0 < flow_dt <= flow_time");
        }
    }
}

PhasePoint apply_swap(const HamiltonianModel& model, SwapMove move, double center, const PhasePoint& s) {
    PhasePoint out = s;
    switch (move) {
        case SwapMove::reflect_reaction: {
            auto q = out.q();
            q[0] = 2.0 * center - q[0];
            for (std::size_t i = 0; i < model.bath().size(); ++i) {
                const auto& m = model.bath()[i];
                const double anchor = m.coupling * center / (m.frequency * m.frequency);
                q[i + 1] = 2.0 * anchor - q[i + 1];
            }
            break;
        }
        case SwapMove::momentum_flip:
            out = time_reverse(s);
            break;
        case SwapMove::flow:
        case SwapMove::momentum_rotation:
            throw ContractViolation("random moves are not a fixed involution; use the sampler");
    }
    return out;
}

std::vector<double> SampleBatch::reaction_coordinates() const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& s : points) out.push_back(s.q()[0]);
    return out;
}

bool satisfies(const HamiltonianModel& model, const ConditioningContext& ctx, const EnsembleSpec& spec,
               const PhasePoint& s, std::size_t y) {
    if (s.dim() != model.dim()) return false;
    if (spec.restriction && !spec.restriction->contains(s.q())) return false;
    if (const auto* m = std::get_if<Microcanonical>(&spec.kind)) {
        const double h = total_energy(model, s, ctx, y);
        return std::abs(h - m->energy) <= 0.5 * m->width;
    }
    return std::isfinite(potential_energy(model, s.q(), ctx, y));
}

namespace {

struct ChainResult {
    std::vector<PhasePoint> points;
    std::vector<std::size_t> y;
    std::size_t proposed = 0;
    std::size_t accepted = 0;
    double iat_reaction = 1.0;
    double iat_energy = 1.0;
};

double scale_at(const std::vector<double>& scales, std::size_t i, std::size_t dim) {
    if (scales.size() == 1) return scales[0];
    if (scales.size() == dim) return scales[i % dim];
    if (scales.size() == 2 * dim) return scales[i];
    throw ContractViolation("proposal_scale must have 1, dim or 2*dim entries");
}

std::vector<double> initial_guess(const HamiltonianModel& model, const std::optional<Macrostate>& restriction,
                                  const SamplerConfig& cfg) {
    const std::size_t dim = model.dim();
    if (cfg.initial_q) {
        if (cfg.initial_q->size() != dim) throw ContractViolation("initial_q has the wrong dimension");
        return *cfg.initial_q;
    }
    std::vector<double> q(dim, 0.0);
    if (restriction) {
        const auto& r = restriction->substates().front();
        const auto b = r.bound_on(0);
        if (std::isfinite(b.lo) && std::isfinite(b.hi)) q[0] = 0.5 * (b.lo + b.hi);
        else if (std::isfinite(b.lo)) q[0] = b.lo + 0.5;
        else if (std::isfinite(b.hi)) q[0] = b.hi - 0.5;
    } else if (model.reaction_potential().is_flat()) {
        const auto& box = std::get<PiecewiseFlatBox>(model.reaction_potential().kind());
        q[0] = 0.5 * (box.wells.front().lo + box.wells.front().hi);
    }
    for (std::size_t i = 0; i < model.bath().size(); ++i) {
        const auto& m = model.bath()[i];
        q[i + 1] = m.coupling * q[0] / (m.frequency * m.frequency);
    }
    return q;
}

/// Draws a random perturbation of the guess for initialization retries.
std::vector<double> perturbed(const std::vector<double>& guess, const std::optional<Macrostate>& restriction,
                              Philox4x32& rng, double spread) {
    std::vector<double> q = guess;
    if (restriction) {
        const auto& subs = restriction->substates();
        const auto& r = subs[uniform_index(rng, subs.size())];
        for (std::size_t i = 0; i < q.size(); ++i) {
            const auto b = r.bound_on(i);
            const double lo = std::isfinite(b.lo) ? b.lo : (std::isfinite(b.hi) ? b.hi - 2.0 * spread : -spread);
            const double hi = std::isfinite(b.hi) ? b.hi : lo + 2.0 * spread;
            q[i] = lo + (hi - lo) * uniform01(rng);
        }
    } else {
        for (double& x : q) x += spread * standard_normal(rng);
    }
    return q;
}

SamplingError init_failure(const std::optional<Macrostate>& restriction) {
    if (restriction) {
        return SamplingError(SamplingError::Kind::empty_restriction,
                             "restriction '" + restriction->label() + "' never hit while initializing the sampler");
    }
    return SamplingError(SamplingError::Kind::shell_unreachable, "energy shell unreachable from any trial point");
}

/// Starting point on the shell: place q, then scale a random momentum direction to hit E exactly.
PhasePoint shell_start(const HamiltonianModel& model, const ConditioningContext& ctx, std::size_t y,
                       const EnsembleSpec& spec, const SamplerConfig& cfg, Philox4x32& rng) {
    const double energy = std::get<Microcanonical>(spec.kind).energy;
    const auto guess = initial_guess(model, spec.restriction, cfg);
    const std::size_t dim = model.dim();
    for (int attempt = 0; attempt < 20000; ++attempt) {
        const auto q = attempt == 0 ? guess : perturbed(guess, spec.restriction, rng, 2.0);
        if (spec.restriction && !spec.restriction->contains(q)) continue;
        const double u = potential_energy(model, q, ctx, y);
        if (!std::isfinite(u) || u > energy) continue;
        std::vector<double> p(dim);
        double k = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            p[i] = standard_normal(rng) * std::sqrt(model.mass(i));
            k += 0.5 * p[i] * p[i] / model.mass(i);
        }
        if (k > 0.0) {
            const double f = std::sqrt((energy - u) / k);
            for (double& pi : p) pi *= f;
        }
        PhasePoint s(q, std::move(p));
        if (satisfies(model, ctx, spec, s, y)) return s;
    }
    throw init_failure(spec.restriction);
}

std::size_t chain_share(std::size_t total, std::size_t chains, std::size_t c) {
    return total / chains + (c < total % chains ? 1 : 0);
}

template <typename StepFn>
ChainResult run_chain(const SamplerConfig& cfg, std::size_t n_keep, PhasePoint state, std::size_t y,
                      StepFn&& step, bool burnin_must_move, const std::optional<Macrostate>& restriction) {
    ChainResult out;
    std::size_t burn_accepted = 0;
    for (std::size_t i = 0; i < cfg.n_burnin; ++i) burn_accepted += step(state, y) ? 1 : 0;
    if (burnin_must_move && cfg.n_burnin > 0 && burn_accepted == 0) {
        if (restriction) {
            throw SamplingError(SamplingError::Kind::shell_unreachable,
                                "no proposal accepted during burn-in inside '" + restriction->label() + "'");
        }
        throw SamplingError(SamplingError::Kind::shell_unreachable, "no proposal accepted during burn-in");
    }
    out.points.reserve(n_keep);
    for (std::size_t k = 0; k < n_keep; ++k) {
        for (std::size_t t = 0; t < cfg.thinning; ++t) {
            ++out.proposed;
            out.accepted += step(state, y) ? 1 : 0;
        }
        out.points.push_back(state);
        out.y.push_back(y);
    }
    return out;
}

SampleBatch merge(std::vector<ChainResult>& chains, bool position_only,
                  const HamiltonianModel& model, const ConditioningContext& ctx) {
    SampleBatch batch;
    batch.position_only = position_only;
    batch.chains = chains.size();
    std::size_t proposed = 0;
    std::size_t accepted = 0;
    double iat_q = 0.0;
    double iat_e = 0.0;
    for (auto& c : chains) {
        std::vector<double> xs;
        std::vector<double> es;
        for (std::size_t i = 0; i < c.points.size(); ++i) {
            xs.push_back(c.points[i].q()[0]);
            es.push_back(position_only ? potential_energy(model, c.points[i].q(), ctx, c.y[i])
                                       : model.kinetic(c.points[i].p()));
        }
        iat_q += stats::integrated_autocorrelation_time(xs);
        iat_e += stats::integrated_autocorrelation_time(es);
        proposed += c.proposed;
        accepted += c.accepted;
        std::move(c.points.begin(), c.points.end(), std::back_inserter(batch.points));
        batch.y.insert(batch.y.end(), c.y.begin(), c.y.end());
    }
    batch.weights.assign(batch.points.size(), 1.0);
    batch.acceptance_rate = proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;
    batch.diagnostics["iat_reaction"] = iat_q / static_cast<double>(chains.size());
    batch.diagnostics["iat_energy"] = iat_e / static_cast<double>(chains.size());
    return batch;
}

}  // namespace

SampleBatch sample_microcanonical(const HamiltonianModel& model, const ConditioningContext& ctx, std::size_t y,
                                  const EnsembleSpec& spec, const SamplerConfig& cfg) {
    validate(spec);
    validate(cfg);
    if (!std::holds_alternative<Microcanonical>(spec.kind)) {
        throw ContractViolation("sample_microcanonical needs a microcanonical ensemble");
    }
    (void)ctx[y];
    const std::size_t dim = model.dim();
    const std::size_t flow_max = static_cast<std::size_t>(std::max(1.0, std::floor(cfg.flow_time / cfg.flow_dt)));

    std::vector<ChainResult> chains(cfg.n_chains);
    parallel_for(cfg.n_chains, cfg.workers, [&](std::size_t c) {
        Philox4x32 rng(cfg.seed, cfg.stream_base + c);
        PhasePoint start = shell_start(model, ctx, y, spec, cfg, rng);
        std::vector<double> scales(2 * dim);
        for (std::size_t i = 0; i < 2 * dim; ++i) scales[i] = scale_at(cfg.proposal_scale, i, dim);

        auto step = [&](PhasePoint& s, std::size_t yy) -> bool {
            if (!cfg.swap_moves.empty() && uniform01(rng) < cfg.swap_probability) {
                const SwapMove move = cfg.swap_moves[uniform_index(rng, cfg.swap_moves.size())];
                if (move == SwapMove::momentum_rotation) {
                    if (dim < 2) return false;
                    const std::size_t i = uniform_index(rng, dim);
                    std::size_t j = uniform_index(rng, dim - 1);
                    if (j >= i) ++j;
                    const double theta = std::numbers::pi * (2.0 * uniform01(rng) - 1.0);
                    const double c = std::cos(theta);
                    const double sn = std::sin(theta);
                    std::vector<double> p(s.p().begin(), s.p().end());
                    const double si = std::sqrt(model.mass(i));
                    const double sj = std::sqrt(model.mass(j));
                    const double ui = p[i] / si;
                    const double uj = p[j] / sj;
                    p[i] = si * (c * ui - sn * uj);
                    p[j] = sj * (sn * ui + c * uj);
                    PhasePoint proposal(std::vector<double>(s.q().begin(), s.q().end()), std::move(p));
                    if (!satisfies(model, ctx, spec, proposal, yy)) return false;
                    s = std::move(proposal);
                    return true;
                }
                if (move == SwapMove::flow) {
                    IntegratorSpec integ{cfg.flow_dt};
                    const double tau = static_cast<double>(1 + uniform_index(rng, flow_max)) * cfg.flow_dt;
                    PhasePoint proposal = time_reverse(evolve(model, ctx, yy, s, tau, integ).final);
                    if (!satisfies(model, ctx, spec, proposal, yy)) return false;
                    s = time_reverse(proposal);
                    return true;
                }
                PhasePoint proposal = apply_swap(model, move, cfg.reflection_center, s);
                if (!satisfies(model, ctx, spec, proposal, yy)) return false;
                s = std::move(proposal);
                return true;
            }
            std::vector<double> q(s.q().begin(), s.q().end());
            std::vector<double> p(s.p().begin(), s.p().end());
            for (std::size_t i = 0; i < dim; ++i) q[i] += scales[i] * standard_normal(rng);
            for (std::size_t i = 0; i < dim; ++i) p[i] += scales[dim + i] * standard_normal(rng);
            PhasePoint proposal(std::move(q), std::move(p));
            if (!satisfies(model, ctx, spec, proposal, yy)) return false;
            s = std::move(proposal);
            return true;
        };
        chains[c] = run_chain(cfg, chain_share(cfg.n_samples, cfg.n_chains, c), std::move(start), y, step, true,
                              spec.restriction);
    });
    return merge(chains, false, model, ctx);
}

SampleBatch sample_canonical(const HamiltonianModel& model, const ConditioningContext& ctx,
                             const EnsembleSpec& spec, const SamplerConfig& cfg) {
    validate(spec);
    validate(cfg);
    const auto* can = std::get_if<Canonical>(&spec.kind);
    if (!can) throw ContractViolation("sample_canonical needs a canonical ensemble");
    const double beta = can->beta;
    const std::size_t dim = model.dim();

    std::vector<ChainResult> chains(cfg.n_chains);
    parallel_for(cfg.n_chains, cfg.workers, [&](std::size_t c) {
        Philox4x32 rng(cfg.seed, cfg.stream_base + c);
        const auto guess = initial_guess(model, spec.restriction, cfg);
        std::optional<std::vector<double>> start;
        for (int attempt = 0; attempt < 20000 && !start; ++attempt) {
            auto q = attempt == 0 ? guess : perturbed(guess, spec.restriction, rng, 2.0);
            if (spec.restriction && !spec.restriction->contains(q)) continue;
            if (!std::isfinite(potential_energy(model, q, ctx, 0))) continue;
            start = std::move(q);
        }
        if (!start) throw init_failure(spec.restriction);
        std::size_t y0 = 0;
        while (ctx[y0].weight == 0.0) ++y0;

        double u = potential_energy(model, *start, ctx, y0);
        PhasePoint state(*start, std::vector<double>(dim, 0.0));
        std::vector<double> scales(dim);
        for (std::size_t i = 0; i < dim; ++i) scales[i] = scale_at(cfg.proposal_scale, i, dim);
        std::vector<double> q(dim);

        auto accept = [&](double du) { return du <= 0.0 || uniform01(rng) < std::exp(-beta * du); };
        auto step = [&](PhasePoint& s, std::size_t& yy) -> bool {
            const double r = uniform01(rng);
            if (ctx.size() > 1 && r < cfg.y_move_probability) {
                // Independence proposal from the weights; the weights cancel in the ratio.
                double pick = uniform01(rng);
                std::size_t cand = 0;
                for (; cand + 1 < ctx.size(); ++cand) {
                    pick -= ctx[cand].weight;
                    if (pick < 0.0) break;
                }
                if (ctx[cand].weight == 0.0) return false;
                const double u_new = potential_energy(model, s.q(), ctx, cand);
                if (!accept(u_new - u)) return false;
                yy = cand;
                u = u_new;
                return true;
            }
            if (!cfg.swap_moves.empty() && uniform01(rng) < cfg.swap_probability) {
                const SwapMove move = cfg.swap_moves[uniform_index(rng, cfg.swap_moves.size())];
                // Only configuration moves apply to position-only sampling.
                if (move != SwapMove::reflect_reaction) return false;
                PhasePoint proposal = apply_swap(model, move, cfg.reflection_center, s);
                if (spec.restriction && !spec.restriction->contains(proposal.q())) return false;
                const double u_new = potential_energy(model, proposal.q(), ctx, yy);
                if (!std::isfinite(u_new) || !accept(u_new - u)) return false;
                s = std::move(proposal);
                u = u_new;
                return true;
            }
            for (std::size_t i = 0; i < dim; ++i) q[i] = s.q()[i] + scales[i] * standard_normal(rng);
            if (spec.restriction && !spec.restriction->contains(q)) return false;
            const double u_new = potential_energy(model, q, ctx, yy);
            if (!std::isfinite(u_new) || !accept(u_new - u)) return false;
            std::copy(q.begin(), q.end(), s.q().begin());
            u = u_new;
            return true;
        };

        ChainResult out;
        std::size_t yy = y0;
        std::size_t burn_accepted = 0;
        for (std::size_t i = 0; i < cfg.n_burnin; ++i) burn_accepted += step(state, yy) ? 1 : 0;
        if (cfg.n_burnin > 0 && burn_accepted == 0) {
            throw SamplingError(SamplingError::Kind::shell_unreachable, "no proposal accepted during burn-in");
        }
        const std::size_t n_keep = chain_share(cfg.n_samples, cfg.n_chains, c);
        for (std::size_t k = 0; k < n_keep; ++k) {
            for (std::size_t t = 0; t < cfg.thinning; ++t) {
                ++out.proposed;
                out.accepted += step(state, yy) ? 1 : 0;
            }
            out.points.push_back(state);
            out.y.push_back(yy);
        }
        chains[c] = std::move(out);
    });
    return merge(chains, true, model, ctx);
}

QuadratureResult partition_function_quadrature(const HamiltonianModel& model, const ConditioningContext& ctx,
                                               std::size_t y, double beta, const Region& region, double abs_tol) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ContractViolation("partition function needs beta > 0");
    (void)ctx[y];
    return integrate_region(
        model, region, [&](std::span<const double> q) { return std::exp(-beta * potential_energy(model, q, ctx, y)); },
        abs_tol);
}

QuadratureResult partition_function_quadrature(const HamiltonianModel& model, const ConditioningContext& ctx,
                                               double beta, const Region& region, double abs_tol) {
    QuadratureResult total;
    for (std::size_t y = 0; y < ctx.size(); ++y) {
        if (ctx[y].weight == 0.0) continue;
        const auto z = partition_function_quadrature(model, ctx, y, beta, region, abs_tol);
        total.value += ctx[y].weight * z.value;
        total.error += ctx[y].weight * z.error;
    }
    return total;
}

VolumeRatio volume_ratio_on_shell(const HamiltonianModel& model, const ConditioningContext& ctx, std::size_t y,
                                  const EnsembleSpec& spec, const Macrostate& a, const Macrostate& b,
                                  const SamplerConfig& cfg, std::size_t min_crossings, double confidence) {
    if (!std::holds_alternative<Microcanonical>(spec.kind)) {
        throw ContractViolation("volume_ratio_on_shell needs a microcanonical ensemble");
    }
    VolumeRatio out;
    if (a == b) {
        out.identical_regions = true;
        out.ratio = 1.0;
        out.ci = {1.0, 1.0};
        return out;
    }
    const auto batch = sample_microcanonical(model, ctx, y, spec, cfg);
    out.samples = batch.points.size();

    // Labels along each chain: +1 in A, 0 in B; samples in neither are skipped.
    std::vector<double> labels;
    labels.reserve(batch.points.size());
    const std::size_t per_chain_base = cfg.n_samples / cfg.n_chains;
    std::size_t index = 0;
    for (std::size_t c = 0; c < cfg.n_chains; ++c) {
        const std::size_t n = per_chain_base + (c < cfg.n_samples % cfg.n_chains ? 1 : 0);
        int last = -1;
        for (std::size_t k = 0; k < n; ++k, ++index) {
            const auto& s = batch.points[index];
            int label = -1;
            if (a.contains(s.q())) label = 1;
            else if (b.contains(s.q())) label = 0;
            if (label < 0) continue;
            if (label == 1) ++out.count_a;
            else ++out.count_b;
            if (last >= 0 && label != last) ++out.crossings;
            last = label;
            labels.push_back(static_cast<double>(label));
        }
    }
    if (out.crossings < min_crossings) {
        throw SamplingError(SamplingError::Kind::insufficient_exchange,
                            "insufficient region exchange: " + std::to_string(out.crossings) + " crossings (need " +
                                std::to_string(min_crossings) + ")",
                            out.crossings);
    }
    const double n = static_cast<double>(labels.size());
    const double iat = stats::integrated_autocorrelation_time(labels);
    out.effective_samples = n / iat;
    const double fraction = static_cast<double>(out.count_a) / n;
    const auto f_ci = stats::wilson(fraction * out.effective_samples, out.effective_samples, confidence);
    const auto odds = [](double f) {
        return f >= 1.0 ? std::numeric_limits<double>::infinity() : f / (1.0 - f);
    };
    out.ratio = out.count_b ? static_cast<double>(out.count_a) / static_cast<double>(out.count_b)
                            : std::numeric_limits<double>::infinity();
    out.ci = {odds(f_ci.lo), odds(f_ci.hi)};
    return out;
}

void write_csv(std::ostream& os, const SampleBatch& batch, const std::map<std::string, std::string>& metadata) {
    for (const auto& [k, v] : metadata) os << "# " << k << '=' << v << '\n';
    os << "# acceptance_rate=" << batch.acceptance_rate << '\n';
    os << "# position_only=" << (batch.position_only ? "true" : "false") << '\n';
    const std::size_t dim = batch.points.empty() ? 0 : batch.points.front().dim();
    for (std::size_t i = 0; i < dim; ++i) os << 'q' << i << ',';
    if (!batch.position_only) {
        for (std::size_t i = 0; i < dim; ++i) os << 'p' << i << ',';
    }
    os << "y\n";
    os.precision(17);
    for (std::size_t k = 0; k < batch.points.size(); ++k) {
        const auto& s = batch.points[k];
        for (double x : s.q()) os << x << ',';
        if (!batch.position_only) {
            for (double x : s.p()) os << x << ',';
        }
        os << batch.y[k] << '\n';
    }
}

}  // namespace revlab
