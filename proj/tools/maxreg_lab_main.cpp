#include "maxreglab/experiments.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <exception>
#include <string>

namespace {

// exit codes: 0 success, 2 config error, 3 check failure, 4 numerical failure,
// 5 unknown experiment, 6 unwritable output
constexpr int kConfigError = 2;
constexpr int kUnknownExperiment = 5;

void print_summary(const maxreglab::ExperimentOutput& out) {
    std::printf("# %s\n", out.experiment.c_str());
    for (const maxreglab::CheckResult& c : out.checks) {
        std::printf("%-48s %-5s measured=%.17g window=[%.17g, %.17g] [%s]\n", c.name.c_str(),
                    c.criterion.c_str(), c.measured, c.lower, c.upper, c.pass ? "PASS" : "FAIL");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"maxreg-lab: boundary-feedback heat semigroup diagnostics"};
    app.require_subcommand(1);

    CLI::App* run = app.add_subcommand("run", "run an experiment suite from a config file");
    std::string config_path;
    std::string out_dir;
    std::string experiment;
    std::uint64_t seed = 0;
    bool seed_set = false, out_set = false, exp_set = false;
    run->add_option("--config", config_path, "path to the key = value config file")->required();
    run->add_option("--out", out_dir, "output directory (overrides config)")
        ->each([&](const std::string&) { out_set = true; });
    run->add_option("--seed", seed, "master seed (overrides config)")
        ->each([&](const std::string&) { seed_set = true; });
    run->add_option("--experiment", experiment, "experiment name (overrides config)")
        ->each([&](const std::string&) { exp_set = true; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? kConfigError : 0;
    }

    maxreglab::ExperimentConfig cfg;
    try {
        cfg = maxreglab::parse_config(config_path);
    } catch (const maxreglab::ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kConfigError;
    }
    if (out_set) cfg.out_dir = out_dir;
    if (seed_set) cfg.seed = seed;
    if (exp_set) {
        const auto& names = maxreglab::experiment_names();
        if (std::find(names.begin(), names.end(), experiment) == names.end()) {
            std::fprintf(stderr, "unknown experiment '%s'\nusage: maxreg-lab run --config <path> "
                                 "[--out <dir>] [--seed <u64>] [--experiment <name>]\n",
                         experiment.c_str());
            return kUnknownExperiment;
        }
        cfg.experiment = experiment;
    }

    try {
        const maxreglab::RunStatus status = maxreglab::run_experiment(cfg);
        for (const auto& out : status.outputs) print_summary(out);
        if (!status.message.empty()) std::fprintf(stderr, "%s\n", status.message.c_str());
        return status.exit_code;
    } catch (const maxreglab::ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kUnknownExperiment;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 4;
    }
}
