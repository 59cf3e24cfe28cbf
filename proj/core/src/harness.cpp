#include "revlab/harness.hpp"

#include "revlab/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#ifndef REVLAB_VERSION_STRING
#define REVLAB_VERSION_STRING "0.0.0"
#endif
#ifndef REVLAB_DEFAULT_CONFIG_DIR
#define REVLAB_DEFAULT_CONFIG_DIR "configs"
#endif

namespace revlab {

using nlohmann::json;

std::string software_version() { return REVLAB_VERSION_STRING; }

std::string config_hash(const json& config) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : config.dump()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void to_json(json& j, const RunReport& r) {
    j = {{"name", r.name},
         {"kind", r.kind},
         {"config", r.config},
         {"config_hash", r.config_hash},
         {"verdict", to_string(r.verdict)},
         {"checks", r.checks},
         {"results", r.results},
         {"payloads", r.payloads},
         {"wall_time_s", r.wall_time_s},
         {"software", {{"name", "revlab"}, {"version", r.version}}}};
    if (!r.children.empty()) j["reports"] = r.children;
}

void from_json(const json& j, RunReport& r) {
    r.name = j.at("name").get<std::string>();
    r.kind = j.at("kind").get<std::string>();
    r.config = j.at("config");
    r.config_hash = j.at("config_hash").get<std::string>();
    const auto v = j.at("verdict").get<std::string>();
    r.verdict = v == "pass" ? Verdict::pass : (v == "fail" ? Verdict::fail : Verdict::inconclusive);
    r.checks = j.at("checks").get<std::vector<CheckResult>>();
    r.results = j.at("results");
    r.payloads = j.at("payloads").get<std::map<std::string, Payload>>();
    r.wall_time_s = j.at("wall_time_s").get<double>();
    r.version = j.at("software").at("version").get<std::string>();
    if (j.contains("reports")) r.children = j.at("reports").get<std::vector<RunReport>>();
}

Verdict aggregate(const std::vector<CheckResult>& checks) {
    bool any_pass = false;
    for (const auto& c : checks) {
        if (c.verdict == Verdict::fail) return Verdict::fail;
        any_pass = any_pass || c.verdict == Verdict::pass;
    }
    return any_pass ? Verdict::pass : Verdict::inconclusive;
}

json numeric_content(const RunReport& r) {
    json j = {{"name", r.name},
              {"config_hash", r.config_hash},
              {"verdict", to_string(r.verdict)},
              {"checks", r.checks},
              {"results", r.results},
              {"payloads", r.payloads}};
    json children = json::array();
    for (const auto& c : r.children) children.push_back(numeric_content(c));
    if (!children.empty()) j["reports"] = children;
    return j;
}

int exit_code(Verdict v) { return v == Verdict::fail ? 1 : 0; }

namespace {

ExperimentConfig apply_seed(const ExperimentConfig& config, const HarnessOptions& options) {
    if (!options.seed_override || *options.seed_override == config.seed) return config;
    json doc = config.source;
    doc["seed"] = *options.seed_override;
    return parse_config(doc);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

RunReport run_config(const ExperimentConfig& config_in, const HarnessOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentConfig config = apply_seed(config_in, options);
    RunReport r;
    r.name = config.name;
    r.kind = config.kind;
    r.config = config.source;
    r.config_hash = config_hash(config.source);
    r.version = software_version();
    auto result = run_experiment(config, options.run);
    r.checks = std::move(result.checks);
    r.payloads = std::move(result.payloads);
    r.results = std::move(result.results);
    r.verdict = aggregate(r.checks);
    r.wall_time_s = seconds_since(t0);
    return r;
}

ExperimentConfig load_config_or_report(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("/", 0, "cannot read '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error&) {
        return load_config(path);  // reports the line
    }
    if (doc.is_object() && doc.contains("software") && doc.contains("config")) {
        if (doc.contains("reports")) throw ConfigError("/", 0, "'" + path.string() + "' is a suite report; rerun the suite");
        return parse_config(doc.at("config"));
    }
    try {
        return parse_config(doc, text);
    } catch (const ConfigError& e) {
        throw ConfigError(e.field(), e.line(), path.string() + ": " + e.what());
    }
}

RunReport run_file(const std::filesystem::path& path, const HarnessOptions& options) {
    return run_config(load_config_or_report(path), options);
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"classical-identities", "quantum-identities", "bounds", "replicator",
                                                "all"};
    return names;
}

std::filesystem::path bundled_config_dir() {
    if (const char* env = std::getenv("REVLAB_CONFIG_DIR"); env && *env) return env;
    return REVLAB_DEFAULT_CONFIG_DIR;
}

std::vector<std::filesystem::path> suite_configs(const std::string& name, const HarnessOptions& options) {
    const auto& names = suite_names();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
        std::string list;
        for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
        throw ConfigError("/", 0, "unknown suite '" + name + "' (" + list + ")");
    }
    const auto root = options.config_dir.empty() ? bundled_config_dir() : options.config_dir;
    std::vector<std::filesystem::path> out;
    const std::vector<std::string> parts =
        name == "all" ? std::vector<std::string>(names.begin(), names.end() - 1) : std::vector<std::string>{name};
    for (const auto& part : parts) {
        const auto dir = root / part;
        if (!std::filesystem::is_directory(dir)) {
            throw ConfigError("/", 0, "suite directory '" + dir.string() + "' is missing");
        }
        std::vector<std::filesystem::path> files;
        for (const auto& e : std::filesystem::directory_iterator(dir)) {
            if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        out.insert(out.end(), files.begin(), files.end());
    }
    return out;
}

RunReport run_suite(const std::string& name, const HarnessOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto files = suite_configs(name, options);
    // Validate everything before running anything.
    std::vector<ExperimentConfig> configs;
    for (const auto& f : files) configs.push_back(load_config(f));
    RunReport suite;
    suite.name = name;
    suite.kind = "suite";
    suite.version = software_version();
    json hashes = json::array();
    for (const auto& c : configs) {
        suite.children.push_back(run_config(c, options));
        const auto& child = suite.children.back();
        hashes.push_back(child.config_hash);
        suite.checks.push_back({child.name, child.verdict, std::to_string(child.checks.size()) + " checks", {}, {}});
    }
    suite.config = {{"suite", name}, {"configs", hashes}};
    if (options.seed_override) suite.config["seed"] = *options.seed_override;
    suite.config_hash = config_hash(suite.config);
    suite.verdict = aggregate(suite.checks);
    suite.wall_time_s = seconds_since(t0);
    return suite;
}

std::filesystem::path write_report(const RunReport& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto path = dir / (r.name + ".json");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << json(r).dump(2) << '\n';
    return path;
}

RunReport read_report(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
    return json::parse(in).get<RunReport>();
}

void write_payload_csv(std::ostream& out, const Payload& p) {
    for (std::size_t i = 0; i < p.columns.size(); ++i) {
        out << (i ? "," : "") << p.columns[i];
        if (i < p.units.size() && !p.units[i].empty()) out << " [" << p.units[i] << ']';
    }
    out << '\n';
    char buf[32];
    for (const auto& row : p.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", row[i]);
            out << (i ? "," : "") << buf;
        }
        out << '\n';
    }
}

namespace {

void collect(const RunReport& r, const std::string& what, std::vector<std::pair<std::string, const Payload*>>& found,
             std::set<std::string>& available) {
    for (const auto& [name, payload] : r.payloads) {
        available.insert(name);
        if (name == what) found.emplace_back(r.name, &payload);
    }
    for (const auto& c : r.children) collect(c, what, found, available);
}

}  // namespace

std::vector<std::filesystem::path> export_plot_data(const RunReport& r, const std::string& what,
                                                    const std::filesystem::path& dir) {
    std::vector<std::pair<std::string, const Payload*>> found;
    std::set<std::string> available;
    collect(r, what, found, available);
    if (found.empty()) {
        std::string list;
        for (const auto& a : available) list += (list.empty() ? "" : ", ") + a;
        throw LookupError("report '" + r.name + "' has no '" + what + "' payload; available: " +
                          (list.empty() ? "none" : list));
    }
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    for (const auto& [name, payload] : found) {
        const auto path = dir / (name + "." + what + ".csv");
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
        write_payload_csv(out, *payload);
        written.push_back(path);
    }
    return written;
}

std::string summary(const RunReport& r) {
    std::ostringstream os;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", r.wall_time_s);
    os << r.name << ": " << to_string(r.verdict) << " (" << buf << " s)\n";
    const auto& list = r.children;
    if (!list.empty()) {
        for (const auto& c : list) {
            std::istringstream in(summary(c));
            std::string line;
            while (std::getline(in, line)) os << "  " << line << '\n';
        }
        return os.str();
    }
    for (const auto& c : r.checks) {
        os << "  [" << to_string(c.verdict) << "] " << c.name;
        if (c.value) {
            std::snprintf(buf, sizeof buf, "%.3g", *c.value);
            os << " = " << buf;
        }
        if (c.tolerance) {
            std::snprintf(buf, sizeof buf, "%.3g", *c.tolerance);
            os << " (limit " << buf << ")";
        }
        if (!c.detail.empty()) os << ": " << c.detail;
        os << '\n';
    }
    return os.str();
}

}  // namespace revlab
