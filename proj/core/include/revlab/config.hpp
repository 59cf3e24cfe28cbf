#pragma once

#include "revlab/dynamics.hpp"
#include "revlab/model.hpp"
#include "revlab/region.hpp"
#include "revlab/replicator.hpp"
#include "revlab/sampling.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace revlab {

/// Invalid experiment configuration. `field` is a JSON pointer; `line` is 1-based (0 if unknown).
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, std::size_t line, const std::string& message);

    const std::string& field() const noexcept { return field_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string field_;
    std::size_t line_;
};

struct HarmonicSanityParams {
    HamiltonianModel model{Harmonic{}};
    IntegratorSpec integrator;
    double q0 = 1.0;
    double p0 = 0.0;
    double tau = 1.0;
};

struct DynamicsParams {
    HamiltonianModel model{Harmonic{}};
    ConditioningContext context;
    IntegratorSpec integrator;
    std::size_t y = 0;
    PhasePoint initial;
    double tau = 1.0;
    /// Long-run drift study: compare max drift over drift_steps against drift_steps / 100.
    std::size_t drift_steps = 0;
};

struct PairSpec {
    HamiltonianModel model_i{Harmonic{}};
    HamiltonianModel model_ii{Harmonic{}};
    ConditioningContext context;
    Macrostate m_i{Region::reaction_interval("I", -1.0, 0.0)};
    Macrostate m_ii{Region::reaction_interval("II", 0.0, 1.0)};
};

struct EqualityParams {
    PairSpec pair;
    std::vector<double> betas;
};

struct RatioParams {
    HamiltonianModel model{Harmonic{}};
    ConditioningContext context;
    Macrostate m_i{Region::reaction_interval("I", -1.0, 0.0)};
    Macrostate m_ii{Region::reaction_interval("II", 0.0, 1.0)};
    Microcanonical shell;
    IntegratorSpec integrator;
    SamplerConfig transition_sampler;
    SamplerConfig volume_sampler;
    std::size_t y = 0;
    double tau = 1.0;
    bool check_reversal = true;
    bool compute_mixing = false;
    std::size_t mixing_bins = 20;
    std::size_t min_arrivals = 30;
    double confidence = 0.95;
    std::size_t min_trajectories = 0;
    /// Negative control: the volume chain is expected to starve, and the check passes only on
    /// an inconclusive verdict.
    bool starved_control = false;
};

struct JensenParams {
    PairSpec pair;
    SamplerConfig sampler;
    double beta = 1.0;
    std::size_t batches = 50;
    double confidence = 0.95;
    bool expect_gap_excludes_zero = false;
};

struct BoundsParams {
    PairSpec pair;
    std::vector<double> betas;
    double irreversibility = 1.0;  ///< pi_rev / pi_fwd is this factor below the equality value
    double overestimate_factor = 1.5;
};

struct QuantumParams {
    std::size_t ratio_instances = 100;
    std::size_t broken_instances = 100;
    std::size_t entropy_instances = 50;
    std::size_t min_dim = 8;
    std::size_t max_dim = 128;
    double tau_max = 10.0;
    double beta = 0.7;
    std::size_t tau_retries = 10;
};

struct ReplicatorRunParams {
    ReplicatorParams params;
    double t_end = 1.0;
    std::size_t paths = 1000;
    std::vector<double> checkpoints;
    std::vector<double> irreversibility{1.0};
    double confidence = 0.999;
    std::optional<EqualityParams> thermo;  ///< source for couple_to_detbal (first beta)
};

struct SamplingParams {
    HamiltonianModel model{Harmonic{}};
    ConditioningContext context;
    EnsembleSpec ensemble{Canonical{}, std::nullopt};
    SamplerConfig sampler;
    std::size_t bins = 40;
};

using ExperimentParams = std::variant<HarmonicSanityParams, DynamicsParams, EqualityParams, RatioParams,
                                      JensenParams, BoundsParams, QuantumParams, ReplicatorRunParams,
                                      SamplingParams>;

struct ExperimentConfig {
    std::string kind;
    std::string name;
    std::uint64_t seed = 0;
    std::optional<std::string> output_dir;
    std::map<std::string, double> tolerances;  ///< overrides by check name
    ExperimentParams params;
    nlohmann::json source;  ///< the validated document, echoed into reports
};

/// Names accepted in the "kind" field.
const std::vector<std::string>& experiment_kinds();

/// Default tolerance of every tolerance-controlled check of a kind.
std::map<std::string, double> default_tolerances(std::string_view kind);

/// Validates the whole document before anything runs. `text` (the raw file) is used only to
/// report line numbers.
ExperimentConfig parse_config(const nlohmann::json& doc, std::string_view text = {});
ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace revlab
