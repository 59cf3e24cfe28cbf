#include "revlab/errors.hpp"
#include "revlab/harness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kConfigError = 2;

struct Common {
    unsigned workers = 0;
    std::optional<std::uint64_t> seed;
    std::string out;
    double tolerance_scale = 1.0;
    std::string config_dir;

    revlab::HarnessOptions options() const {
        revlab::HarnessOptions o;
        o.run.workers = workers;
        o.run.tolerance_scale = tolerance_scale;
        o.seed_override = seed;
        o.config_dir = config_dir;
        return o;
    }
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--workers", c.workers, "Worker threads (0: all cores); results do not depend on it");
    cmd->add_option("--seed", c.seed, "Override the seed of every config");
    cmd->add_option("--out", c.out, "Directory for the JSON report");
    cmd->add_option("--tolerance-scale", c.tolerance_scale, "Multiply every check tolerance")
        ->check(CLI::PositiveNumber);
}

int finish(const revlab::RunReport& report, const std::string& out) {
    std::cout << revlab::summary(report);
    const auto path = revlab::write_report(report, std::filesystem::path(out.empty() ? "reports" : out));
    std::cout << "report: " << path.string() << '\n';
    return revlab::exit_code(report.verdict);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"revlab: numerical checks of detailed balance, entropy identities and the replication bound"};
    app.require_subcommand(1);

    Common common;
    std::string config_path;
    auto* run = app.add_subcommand("run", "Run one experiment config (or re-run a saved report)");
    run->add_option("config", config_path, "Config file or report JSON")->required();
    add_common(run, common);

    std::string suite_name;
    auto* suite = app.add_subcommand("suite", "Run a bundled suite");
    suite->add_option("name", suite_name, "classical-identities, quantum-identities, bounds, replicator or all")
        ->required();
    suite->add_option("--config-dir", common.config_dir, "Root of the suite configs");
    add_common(suite, common);

    std::string report_path;
    std::string what;
    std::string export_out = ".";
    auto* exp = app.add_subcommand("export", "Write payload tables of a report as CSV");
    exp->add_option("report", report_path, "Report JSON")->required();
    exp->add_option("what", what, "trajectory, histogram, population, bound-slack, ...")->required();
    exp->add_option("--out", export_out, "Output directory");

    std::string verify_path;
    unsigned verify_workers = 0;
    auto* verify = app.add_subcommand("verify", "Re-run a report's embedded config and compare numeric payloads");
    verify->add_option("report", verify_path, "Report JSON of a single run")->required();
    verify->add_option("--workers", verify_workers, "Worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    try {
        if (*run) {
            auto opts = common.options();
            const auto config = revlab::load_config_or_report(config_path);
            std::string out = common.out;
            if (out.empty() && config.output_dir) out = *config.output_dir;
            return finish(revlab::run_config(config, opts), out);
        }
        if (*suite) return finish(revlab::run_suite(suite_name, common.options()), common.out);
        if (*exp) {
            const auto report = revlab::read_report(report_path);
            for (const auto& p : revlab::export_plot_data(report, what, export_out)) std::cout << p.string() << '\n';
            return 0;
        }
        if (*verify) {
            const auto saved = revlab::read_report(verify_path);
            revlab::HarnessOptions opts;
            opts.run.workers = verify_workers;
            const auto again = revlab::run_config(revlab::load_config_or_report(verify_path), opts);
            const bool same = revlab::numeric_content(saved).dump() == revlab::numeric_content(again).dump();
            std::cout << (same ? "identical numeric payloads\n" : "numeric payloads differ\n");
            return same ? 0 : 1;
        }
    } catch (const revlab::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kConfigError;
    } catch (const revlab::LookupError& e) {
        std::cerr << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
