#include "revlab/config.hpp"

#include "revlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace revlab {

ConfigError::ConfigError(std::string field, std::size_t line, const std::string& message)
    : std::runtime_error(message), field_(std::move(field)), line_(line) {}

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Line of the first occurrence of "key" in the raw text; 0 when unknown.
std::size_t line_of_key(std::string_view text, const std::string& key) {
    if (text.empty() || key.empty()) return 0;
    const std::string quoted = "\"" + key + "\"";
    const auto pos = text.find(quoted);
    if (pos == std::string_view::npos) return 0;
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

std::string last_segment(const std::string& pointer) {
    const auto slash = pointer.rfind('/');
    return slash == std::string::npos ? pointer : pointer.substr(slash + 1);
}

/// Object reader that remembers which keys were consumed, so leftovers can be rejected.
class Node {
public:
    Node(const json& j, std::string path, std::string_view text) : j_(j), path_(std::move(path)), text_(text) {
        if (!j_.is_object()) fail("expected an object");
    }

    [[noreturn]] void fail(const std::string& msg) const { fail_at(path_, msg); }

    [[noreturn]] void fail_at(const std::string& pointer, const std::string& msg) const {
        const std::string shown = pointer.empty() ? "/" : pointer;
        const std::size_t line = line_of_key(text_, last_segment(pointer));
        std::ostringstream os;
        os << "config error at " << shown;
        if (line > 0) os << " (line " << line << ")";
        os << ": " << msg;
        throw ConfigError(shown, line, os.str());
    }

    std::string at(const std::string& key) const { return path_ + "/" + key; }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        if (!j_.contains(key)) fail_at(at(key), "missing required field '" + key + "'");
        used_.insert(key);
        return j_.at(key);
    }

    Node object(const std::string& key) { return Node(raw(key), at(key), text_); }

    std::optional<Node> optional_object(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return object(key);
    }

    double number(const std::string& key) {
        const json& v = raw(key);
        return as_number(v, at(key));
    }

    double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

    /// Numbers plus the strings "inf" and "-inf" (and null for an absent side).
    double extended(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (v.is_null()) return fallback;
        if (v.is_string()) {
            const auto s = v.get<std::string>();
            if (s == "inf" || s == "+inf") return kInf;
            if (s == "-inf") return -kInf;
            fail_at(at(key), "expected a number, \"inf\" or \"-inf\"");
        }
        if (!v.is_number()) fail_at(at(key), "expected a number");
        return v.get<double>();
    }

    /// [lo, hi] where either side may be "inf"/"-inf".
    std::pair<double, double> interval(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_array() || v.size() != 2) fail_at(at(key), "expected [lo, hi]");
        double ends[2];
        for (std::size_t i = 0; i < 2; ++i) {
            const std::string pointer = at(key) + "/" + std::to_string(i);
            if (v[i].is_string()) {
                const auto s = v[i].get<std::string>();
                if (s == "inf" || s == "+inf") ends[i] = kInf;
                else if (s == "-inf") ends[i] = -kInf;
                else fail_at(pointer, "expected a number, \"inf\" or \"-inf\"");
            } else if (v[i].is_number()) {
                ends[i] = v[i].get<double>();
            } else {
                fail_at(pointer, "expected a number, \"inf\" or \"-inf\"");
            }
        }
        return {ends[0], ends[1]};
    }

    double positive(const std::string& key, double fallback) {
        const double v = number(key, fallback);
        if (!(v > 0.0)) fail_at(at(key), "must be positive");
        return v;
    }

    std::uint64_t count(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number_integer() || v.get<long long>() < 0) fail_at(at(key), "expected a nonnegative integer");
        return v.get<std::uint64_t>();
    }

    std::uint64_t count(const std::string& key, std::uint64_t fallback) { return has(key) ? count(key) : fallback; }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_boolean()) fail_at(at(key), "expected true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_string()) fail_at(at(key), "expected a string");
        return v.get<std::string>();
    }

    std::string string(const std::string& key, const std::string& fallback) {
        return has(key) ? string(key) : fallback;
    }

    std::vector<double> numbers(const std::string& key) {
        const json& v = raw(key);
        if (v.is_number()) return {v.get<double>()};
        if (!v.is_array()) fail_at(at(key), "expected a number or a list of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], at(key) + "/" + std::to_string(i)));
        return out;
    }

    const json& array(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_array()) fail_at(at(key), "expected a list");
        return v;
    }

    /// Rejects keys nobody read. Call after all reads.
    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            (void)value;
            if (!used_.contains(key)) fail_at(at(key), "unknown field '" + key + "'");
        }
    }

    const std::string& path() const noexcept { return path_; }
    std::string_view text() const noexcept { return text_; }

private:
    double as_number(const json& v, const std::string& pointer) const {
        if (!v.is_number()) fail_at(pointer, "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail_at(pointer, "must be finite");
        return d;
    }

    const json& j_;
    std::string path_;
    std::string_view text_;
    std::set<std::string> used_;
};

/// Runs a constructor that validates its arguments, turning ContractViolation into ConfigError.
template <class F>
auto guarded(const Node& where, F&& f) {
    try {
        return f();
    } catch (const ContractViolation& e) {
        where.fail(e.what());
    }
}

HamiltonianModel parse_model(Node n) {
    Node pot = n.object("potential");
    const std::string type = pot.string("type");
    std::optional<PotentialSpec> spec;
    if (type == "harmonic") {
        Harmonic h{pot.number("stiffness", 1.0), pot.number("center", 0.0)};
        spec = guarded(pot, [&] { return PotentialSpec(h); });
    } else if (type == "double_well") {
        AsymmetricDoubleWell w{pot.number("a", 1.0), pot.number("b", 2.0), pot.number("c", 0.0)};
        spec = guarded(pot, [&] { return PotentialSpec(w); });
    } else if (type == "flat_box") {
        PiecewiseFlatBox box;
        const json& wells = pot.array("wells");
        for (std::size_t i = 0; i < wells.size(); ++i) {
            Node w(wells[i], pot.at("wells") + "/" + std::to_string(i), pot.text());
            box.wells.push_back({w.number("lo"), w.number("hi"), w.number("floor", 0.0)});
            w.finish();
        }
        box.gap_floor = pot.extended("gap_floor", kInf);
        spec = guarded(pot, [&] { return PotentialSpec(box); });
    } else {
        pot.fail_at(pot.at("type"), "unknown potential type '" + type + "' (harmonic, double_well, flat_box)");
    }
    pot.finish();
    std::vector<BathMode> bath;
    if (n.has("bath")) {
        const json& modes = n.array("bath");
        for (std::size_t i = 0; i < modes.size(); ++i) {
            Node m(modes[i], n.at("bath") + "/" + std::to_string(i), n.text());
            bath.push_back({m.number("frequency"), m.number("coupling", 0.0)});
            m.finish();
        }
    }
    const double mass = n.number("reaction_mass", 1.0);
    auto model = guarded(n, [&] { return HamiltonianModel(*spec, bath, mass); });
    n.finish();
    return model;
}

ConditioningContext parse_context(Node& root) {
    if (!root.has("context")) return {};
    const json& list = root.array("context");
    std::vector<BoundaryConfig> configs;
    for (std::size_t i = 0; i < list.size(); ++i) {
        Node c(list[i], root.at("context") + "/" + std::to_string(i), root.text());
        configs.push_back({c.string("label"), c.number("weight", 1.0), c.number("offset", 0.0), c.number("tilt", 0.0)});
        c.finish();
    }
    return guarded(root, [&] { return ConditioningContext(configs); });
}

std::vector<CoordinateBound> parse_bounds(Node& n) {
    std::vector<CoordinateBound> bounds;
    if (n.has("interval")) {
        const auto [lo, hi] = n.interval("interval");
        bounds.push_back({0, lo, hi});
    }
    if (n.has("bounds")) {
        const json& list = n.array("bounds");
        for (std::size_t i = 0; i < list.size(); ++i) {
            Node b(list[i], n.at("bounds") + "/" + std::to_string(i), n.text());
            bounds.push_back({b.count("coordinate"), b.extended("lo", -kInf), b.extended("hi", kInf)});
            b.finish();
        }
    }
    return bounds;
}

Region parse_region(Node n, const std::string& fallback_label) {
    const std::string label = n.string("label", fallback_label);
    const auto bounds = parse_bounds(n);
    n.finish();
    return guarded(n, [&] { return Region(label, bounds); });
}

Macrostate parse_macrostate(Node n, const std::string& label) {
    std::vector<Region> regions;
    if (n.has("substates")) {
        const json& list = n.array("substates");
        for (std::size_t i = 0; i < list.size(); ++i) {
            regions.push_back(parse_region(Node(list[i], n.at("substates") + "/" + std::to_string(i), n.text()),
                                           label + "." + std::to_string(i)));
        }
    } else {
        // A single region given inline.
        const auto bounds = parse_bounds(n);
        if (bounds.empty()) n.fail("a macrostate needs 'interval', 'bounds' or 'substates'");
        regions.push_back(guarded(n, [&] { return Region(label, bounds); }));
    }
    n.finish();
    return guarded(n, [&] { return Macrostate(label, regions); });
}

std::map<std::string, Macrostate> parse_macrostates(Node& root) {
    Node ms = root.object("macrostates");
    std::map<std::string, Macrostate> out;
    for (const auto& key : {"I", "II"}) {
        if (ms.has(key)) out.emplace(key, parse_macrostate(ms.object(key), key));
    }
    ms.finish();
    return out;
}

Macrostate require_macrostate(const std::map<std::string, Macrostate>& ms, const std::string& key, const Node& root) {
    const auto it = ms.find(key);
    if (it == ms.end()) root.fail_at(root.at("macrostates") + "/" + key, "missing macrostate '" + key + "'");
    return it->second;
}

IntegratorSpec parse_integrator(Node& root) {
    IntegratorSpec spec;
    if (!root.has("integrator")) return spec;
    Node n = root.object("integrator");
    spec.dt = n.positive("dt", spec.dt);
    spec.drift_threshold = n.positive("drift_threshold", spec.drift_threshold);
    spec.record_every = n.count("record_every", 0);
    n.finish();
    return spec;
}

SwapMove parse_move(const Node& n, const std::string& pointer, const std::string& name) {
    if (name == "reflect_reaction") return SwapMove::reflect_reaction;
    if (name == "momentum_flip") return SwapMove::momentum_flip;
    if (name == "flow") return SwapMove::flow;
    if (name == "momentum_rotation") return SwapMove::momentum_rotation;
    n.fail_at(pointer, "unknown swap move '" + name + "' (reflect_reaction, momentum_flip, flow, momentum_rotation)");
}

SamplerConfig parse_sampler(Node& root, const std::string& key, std::uint64_t seed, std::uint64_t stream_base) {
    SamplerConfig cfg;
    cfg.seed = seed;
    cfg.stream_base = stream_base;
    if (!root.has(key)) return cfg;
    Node n = root.object(key);
    if (n.has("proposal_scale")) cfg.proposal_scale = n.numbers("proposal_scale");
    cfg.n_burnin = n.count("burn_in", cfg.n_burnin);
    cfg.n_samples = n.count("samples", cfg.n_samples);
    cfg.thinning = n.count("thinning", cfg.thinning);
    cfg.n_chains = n.count("chains", cfg.n_chains);
    if (n.has("swap_moves")) {
        const json& list = n.array("swap_moves");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string pointer = n.at("swap_moves") + "/" + std::to_string(i);
            if (!list[i].is_string()) n.fail_at(pointer, "expected a move name");
            cfg.swap_moves.push_back(parse_move(n, pointer, list[i].get<std::string>()));
        }
    }
    cfg.swap_probability = n.number("swap_probability", cfg.swap_probability);
    cfg.reflection_center = n.number("reflection_center", cfg.reflection_center);
    cfg.flow_time = n.positive("flow_time", cfg.flow_time);
    cfg.flow_dt = n.positive("flow_dt", cfg.flow_dt);
    cfg.y_move_probability = n.number("y_move_probability", cfg.y_move_probability);
    if (n.has("initial_q")) cfg.initial_q = n.numbers("initial_q");
    n.finish();
    guarded(n, [&] {
        validate(cfg);
        return 0;
    });
    return cfg;
}

std::size_t parse_y(Node& params, const ConditioningContext& ctx) {
    if (!params.has("y")) return 0;
    const std::string label = params.string("y");
    try {
        return ctx.index_of(label);
    } catch (const LookupError&) {
        params.fail_at(params.at("y"), "unknown boundary configuration '" + label + "'");
    }
}

PairSpec parse_pair(Node& root) {
    PairSpec pair;
    pair.model_i = parse_model(root.object("model"));
    pair.model_ii = root.has("model_ii") ? parse_model(root.object("model_ii")) : pair.model_i;
    pair.context = parse_context(root);
    const auto ms = parse_macrostates(root);
    pair.m_i = require_macrostate(ms, "I", root);
    pair.m_ii = require_macrostate(ms, "II", root);
    guarded(root, [&] {
        check_same_kinetic_form(pair.model_i, pair.model_ii);
        return 0;
    });
    return pair;
}

std::vector<double> parse_betas(Node& params) {
    std::vector<double> betas;
    if (params.has("betas")) betas = params.numbers("betas");
    else betas = {params.positive("beta", 1.0)};
    if (betas.empty()) params.fail_at(params.at("betas"), "needs at least one value");
    for (double b : betas) {
        if (!(b > 0.0)) params.fail_at(params.at("betas"), "inverse temperatures must be positive");
    }
    if (!std::is_sorted(betas.begin(), betas.end())) params.fail_at(params.at("betas"), "must be ascending");
    return betas;
}

Node params_node(Node& root, const json& empty) {
    return root.has("params") ? root.object("params") : Node(empty, "/params", root.text());
}

const std::map<std::string, std::set<std::string>>& allowed_sections() {
    static const std::map<std::string, std::set<std::string>> table{
        {"harmonic_sanity", {"model", "integrator"}},
        {"dynamics", {"model", "context", "integrator"}},
        {"entropy_equality", {"model", "model_ii", "context", "macrostates"}},
        {"ratio_identity", {"model", "context", "macrostates", "ensemble", "integrator", "sampler", "volume_sampler"}},
        {"jensen_chain", {"model", "model_ii", "context", "macrostates", "sampler"}},
        {"bounds", {"model", "model_ii", "context", "macrostates"}},
        {"quantum_identities", {"quantum"}},
        {"replicator", {"replicator", "model", "model_ii", "context", "macrostates"}},
        {"canonical_sampling", {"model", "context", "macrostates", "ensemble", "sampler"}},
    };
    return table;
}

const std::set<std::string>& common_keys() {
    static const std::set<std::string> keys{"kind", "name", "seed", "output_dir", "tolerances", "params"};
    return keys;
}

const std::set<std::string>& all_sections() {
    static const std::set<std::string> keys{"model",       "model_ii", "context", "macrostates",  "ensemble",
                                            "integrator",  "sampler",  "volume_sampler", "quantum", "replicator"};
    return keys;
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds = [] {
        std::vector<std::string> k;
        for (const auto& [name, sections] : allowed_sections()) k.push_back(name);
        return k;
    }();
    return kinds;
}

std::map<std::string, double> default_tolerances(std::string_view kind) {
    static const std::map<std::string, std::map<std::string, double>, std::less<>> table{
        {"harmonic_sanity", {{"closed_form", 1e-5}, {"reversibility", 1e-10}, {"energy_drift", 1e-5}}},
        {"dynamics", {{"reversibility", 1e-10}, {"drift_growth", 0.01}}},
        {"entropy_equality", {{"equality", 1e-8}}},
        {"ratio_identity", {}},
        {"jensen_chain", {{"exact_equality", 1e-8}}},
        {"bounds", {{"bound", 1e-12}}},
        {"quantum_identities", {{"quantum_ratio", 1e-10}, {"quantum_entropy", 1e-10}}},
        {"replicator", {{"mean_path_se", 3.0}, {"coupling_slack", 1e-12}}},
        {"canonical_sampling", {{"mean_u_se", 4.0}}},
    };
    const auto it = table.find(kind);
    if (it == table.end()) throw ContractViolation("unknown experiment kind '" + std::string(kind) + "'");
    return it->second;
}

ExperimentConfig parse_config(const json& doc, std::string_view text) {
    Node root(doc, "", text);
    ExperimentConfig cfg;
    cfg.kind = root.string("kind");
    const auto& sections = allowed_sections();
    const auto kind_it = sections.find(cfg.kind);
    if (kind_it == sections.end()) {
        std::string names;
        for (const auto& k : experiment_kinds()) names += (names.empty() ? "" : ", ") + k;
        root.fail_at("/kind", "unknown experiment kind '" + cfg.kind + "' (" + names + ")");
    }
    // Sections that exist in the schema but are not used by this kind are rejected up front.
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (common_keys().contains(key)) continue;
        if (!all_sections().contains(key)) root.fail_at("/" + key, "unknown field '" + key + "'");
        if (!kind_it->second.contains(key)) {
            root.fail_at("/" + key, "field '" + key + "' is not used by kind '" + cfg.kind + "'");
        }
    }
    if (!root.has("seed")) root.fail_at("/seed", "missing required field 'seed' (there is no clock-based default)");
    cfg.seed = root.count("seed");
    cfg.name = root.string("name", cfg.kind);
    if (root.has("output_dir")) cfg.output_dir = root.string("output_dir");

    const auto defaults = default_tolerances(cfg.kind);
    if (root.has("tolerances")) {
        Node tol = root.object("tolerances");
        for (const auto& [name, value] : defaults) {
            (void)value;
            if (tol.has(name)) cfg.tolerances[name] = tol.positive(name, 1.0);
        }
        tol.finish();
    }

    const json empty = json::object();
    Node params = params_node(root, empty);
    const std::string& kind = cfg.kind;
    if (kind == "harmonic_sanity") {
        HarmonicSanityParams p;
        p.model = parse_model(root.object("model"));
        if (!std::holds_alternative<Harmonic>(p.model.reaction_potential().kind()) || p.model.dim() != 1) {
            root.fail_at("/model", "harmonic_sanity needs a harmonic potential without bath modes");
        }
        p.integrator = parse_integrator(root);
        p.q0 = params.number("q0", 1.0);
        p.p0 = params.number("p0", 0.0);
        p.tau = params.positive("tau", 2.0 * 3.14159265358979323846);
        cfg.params = p;
    } else if (kind == "dynamics") {
        DynamicsParams p;
        p.model = parse_model(root.object("model"));
        p.context = parse_context(root);
        p.integrator = parse_integrator(root);
        p.y = parse_y(params, p.context);
        auto q = params.numbers("q0");
        auto mom = params.numbers("p0");
        if (q.size() != p.model.dim() || mom.size() != p.model.dim()) {
            params.fail("q0 and p0 need " + std::to_string(p.model.dim()) + " entries");
        }
        p.initial = guarded(params, [&] { return PhasePoint(q, mom); });
        p.tau = params.positive("tau", 1.0);
        p.drift_steps = params.count("drift_steps", 0);
        if (p.drift_steps != 0 && p.drift_steps < 100) params.fail_at(params.at("drift_steps"), "must be >= 100");
        cfg.params = p;
    } else if (kind == "entropy_equality") {
        EqualityParams p;
        p.pair = parse_pair(root);
        p.betas = parse_betas(params);
        cfg.params = p;
    } else if (kind == "ratio_identity") {
        RatioParams p;
        p.model = parse_model(root.object("model"));
        p.context = parse_context(root);
        const auto ms = parse_macrostates(root);
        p.m_i = require_macrostate(ms, "I", root);
        p.m_ii = require_macrostate(ms, "II", root);
        Node ens = root.object("ensemble");
        if (ens.string("type") != "microcanonical") ens.fail_at("/ensemble/type", "ratio_identity needs 'microcanonical'");
        p.shell.energy = ens.number("energy");
        p.shell.width = ens.positive("width", 0.05);
        ens.finish();
        p.integrator = parse_integrator(root);
        p.transition_sampler = parse_sampler(root, "sampler", cfg.seed, 0);
        p.volume_sampler = parse_sampler(root, "volume_sampler", cfg.seed, 1u << 20);
        p.y = parse_y(params, p.context);
        p.tau = params.positive("tau", 1.0);
        p.check_reversal = params.boolean("check_reversal", true);
        p.compute_mixing = params.boolean("compute_mixing", false);
        p.mixing_bins = params.count("mixing_bins", 20);
        p.min_arrivals = params.count("min_arrivals", 30);
        p.confidence = params.number("confidence", 0.95);
        p.min_trajectories = params.count("min_trajectories", 0);
        p.starved_control = params.string("control", "none") == "starved_mixing";
        if (params.has("control") && !p.starved_control && params.string("control") != "none") {
            params.fail_at(params.at("control"), "expected 'none' or 'starved_mixing'");
        }
        cfg.params = p;
    } else if (kind == "jensen_chain") {
        JensenParams p;
        p.pair = parse_pair(root);
        p.sampler = parse_sampler(root, "sampler", cfg.seed, 0);
        p.beta = params.positive("beta", 1.0);
        p.batches = params.count("batches", 50);
        p.confidence = params.number("confidence", 0.95);
        p.expect_gap_excludes_zero = params.boolean("expect_gap_excludes_zero", false);
        cfg.params = p;
    } else if (kind == "bounds") {
        BoundsParams p;
        p.pair = parse_pair(root);
        p.betas = parse_betas(params);
        p.irreversibility = params.number("irreversibility", 1.0);
        if (!(p.irreversibility > 0.0 && p.irreversibility <= 1.0)) {
            params.fail_at(params.at("irreversibility"), "must lie in (0, 1]");
        }
        p.overestimate_factor = params.number("overestimate_factor", 1.5);
        if (!(p.overestimate_factor >= 1.0)) params.fail_at(params.at("overestimate_factor"), "must be >= 1");
        cfg.params = p;
    } else if (kind == "quantum_identities") {
        QuantumParams p;
        if (root.has("quantum")) {
            Node q = root.object("quantum");
            p.ratio_instances = q.count("ratio_instances", p.ratio_instances);
            p.broken_instances = q.count("broken_instances", p.broken_instances);
            p.entropy_instances = q.count("entropy_instances", p.entropy_instances);
            p.min_dim = q.count("min_dim", p.min_dim);
            p.max_dim = q.count("max_dim", p.max_dim);
            p.tau_max = q.positive("tau_max", p.tau_max);
            p.beta = q.positive("beta", p.beta);
            p.tau_retries = q.count("tau_retries", p.tau_retries);
            if (p.min_dim < 4 || p.max_dim < p.min_dim || p.max_dim > 512) {
                q.fail("dimensions must satisfy 4 <= min_dim <= max_dim <= 512");
            }
            q.finish();
        }
        cfg.params = p;
    } else if (kind == "replicator") {
        ReplicatorRunParams p;
        Node r = root.object("replicator");
        p.params.g = r.number("g");
        p.params.delta = r.number("delta");
        p.params.n0 = r.count("n0", 1);
        p.params.beta = r.number("beta", 1.0);
        p.params.dq = r.number("dq", 0.0);
        p.params.ds_int = r.number("ds_int", 0.0);
        r.finish();
        guarded(r, [&] {
            p.params.validate();
            return 0;
        });
        p.t_end = params.positive("t_end", 1.0);
        p.paths = params.count("paths", 1000);
        if (p.paths == 0) params.fail_at(params.at("paths"), "must be positive");
        if (params.has("checkpoints")) p.checkpoints = params.numbers("checkpoints");
        for (double c : p.checkpoints) {
            if (c < 0.0 || c > p.t_end) params.fail_at(params.at("checkpoints"), "must lie in [0, t_end]");
        }
        if (!std::is_sorted(p.checkpoints.begin(), p.checkpoints.end())) {
            params.fail_at(params.at("checkpoints"), "must be ascending");
        }
        if (params.has("irreversibility")) p.irreversibility = params.numbers("irreversibility");
        for (double f : p.irreversibility) {
            if (!(f > 0.0 && f <= 1.0)) params.fail_at(params.at("irreversibility"), "factors must lie in (0, 1]");
        }
        p.confidence = params.number("confidence", p.confidence);
        if (root.has("model")) {
            EqualityParams e;
            e.pair = parse_pair(root);
            e.betas = {params.positive("thermo_beta", 1.0)};
            p.thermo = e;
        }
        cfg.params = p;
    } else if (kind == "canonical_sampling") {
        SamplingParams p;
        p.model = parse_model(root.object("model"));
        p.context = parse_context(root);
        std::map<std::string, Macrostate> ms;
        if (root.has("macrostates")) ms = parse_macrostates(root);
        Node ens = root.object("ensemble");
        if (ens.string("type") != "canonical") ens.fail_at("/ensemble/type", "canonical_sampling needs 'canonical'");
        const double beta = ens.positive("beta", 1.0);
        std::optional<Macrostate> restriction;
        if (ens.has("restriction")) restriction = require_macrostate(ms, ens.string("restriction"), root);
        ens.finish();
        p.ensemble = EnsembleSpec::canonical(beta, restriction);
        p.sampler = parse_sampler(root, "sampler", cfg.seed, 0);
        p.bins = params.count("bins", 40);
        if (p.bins < 2) params.fail_at(params.at("bins"), "must be >= 2");
        cfg.params = p;
    }
    if (root.has("params")) params.finish();
    root.finish();
    cfg.source = doc;
    return cfg;
}

ExperimentConfig parse_config_text(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        // nlohmann reports a byte offset; turn it into a line number.
        const std::size_t offset = std::min<std::size_t>(e.byte, text.size());
        const std::size_t line =
            1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
        throw ConfigError("/", line, "config error (line " + std::to_string(line) + "): " + e.what());
    }
    return parse_config(doc, text);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("/", 0, "cannot read config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    try {
        return parse_config_text(text);
    } catch (const ConfigError& e) {
        throw ConfigError(e.field(), e.line(), path.string() + ": " + e.what());
    }
}

}  // namespace revlab
