#pragma once

#include "revlab/config.hpp"
#include "revlab/experiments.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace revlab {

std::string software_version();

/// FNV-1a 64-bit hash of the compact JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

struct RunReport {
    std::string name;
    std::string kind;  ///< experiment kind, or "suite"
    nlohmann::json config = nlohmann::json::object();
    std::string config_hash;
    std::vector<CheckResult> checks;
    std::map<std::string, Payload> payloads;
    nlohmann::json results = nlohmann::json::object();
    Verdict verdict = Verdict::inconclusive;
    double wall_time_s = 0.0;
    std::string version;
    std::vector<RunReport> children;  ///< per-config reports of a suite
};

void to_json(nlohmann::json& j, const RunReport& r);
void from_json(const nlohmann::json& j, RunReport& r);

/// fail if any check failed; otherwise pass if any passed; otherwise inconclusive.
Verdict aggregate(const std::vector<CheckResult>& checks);

/// Everything numeric in a report (checks, results, payloads, recursively) without wall time or
/// version, so two runs can be compared byte for byte.
nlohmann::json numeric_content(const RunReport& r);

/// 0 on pass or inconclusive, 1 on fail.
int exit_code(Verdict v);

struct HarnessOptions {
    RunOptions run;
    std::optional<std::uint64_t> seed_override;
    std::filesystem::path config_dir;  ///< empty: the bundled configs
};

/// Runs a validated config. A seed override is written into the config before it runs, so the
/// embedded config reproduces the run.
RunReport run_config(const ExperimentConfig& config, const HarnessOptions& options = {});

/// Loads a config file, or the embedded config of a saved report.
ExperimentConfig load_config_or_report(const std::filesystem::path& path);

RunReport run_file(const std::filesystem::path& path, const HarnessOptions& options = {});

const std::vector<std::string>& suite_names();
/// $REVLAB_CONFIG_DIR if set, else the configs/ directory of the source tree.
std::filesystem::path bundled_config_dir();

/// Config files of a suite, in name order. Throws ConfigError for an unknown suite.
std::vector<std::filesystem::path> suite_configs(const std::string& name, const HarnessOptions& options = {});

RunReport run_suite(const std::string& name, const HarnessOptions& options = {});

/// Writes <dir>/<name>.json and returns its path.
std::filesystem::path write_report(const RunReport& r, const std::filesystem::path& dir);
RunReport read_report(const std::filesystem::path& path);

/// Writes every payload named `what` (from the report and its children) as CSV into dir.
/// Throws LookupError naming the available payloads when none matches.
std::vector<std::filesystem::path> export_plot_data(const RunReport& r, const std::string& what,
                                                    const std::filesystem::path& dir);

/// CSV with one header row "name [unit],..." and %.17g numbers.
void write_payload_csv(std::ostream& out, const Payload& p);

/// Human-readable summary: one line per check.
std::string summary(const RunReport& r);

}  // namespace revlab
