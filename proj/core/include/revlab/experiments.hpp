#pragma once

#include "revlab/config.hpp"
#include "revlab/detbal.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace revlab {

struct CheckResult {
    std::string name;
    Verdict verdict = Verdict::inconclusive;
    std::string detail;
    std::optional<double> value;
    std::optional<double> tolerance;
};

void to_json(nlohmann::json& j, const CheckResult& c);
void from_json(const nlohmann::json& j, CheckResult& c);

/// A table with named, unit-annotated columns. Rows keep the order they were produced in.
struct Payload {
    std::vector<std::string> columns;
    std::vector<std::string> units;
    std::vector<std::vector<double>> rows;
};

void to_json(nlohmann::json& j, const Payload& p);
void from_json(const nlohmann::json& j, Payload& p);

struct ExperimentResult {
    std::vector<CheckResult> checks;
    std::map<std::string, Payload> payloads;
    nlohmann::json results = nlohmann::json::object();
};

struct RunOptions {
    unsigned workers = 0;  ///< 0: hardware concurrency
    double tolerance_scale = 1.0;
};

/// Executes one validated experiment. Numeric output depends only on the config.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Normalized reaction-coordinate histogram as (bin_center, density); sum(density) * width == 1.
Payload histogram_payload(const std::vector<double>& xs, std::size_t bins);

}  // namespace revlab
