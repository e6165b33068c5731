#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace maxreglab {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Experiment names accepted by the runner.
const std::vector<std::string>& experiment_names();

/// Runner configuration; `key = value` lines, unknown keys rejected.
/// Defaults: n=128, m=256, T=1, p=2, seed=42.
struct ExperimentConfig {
    std::string experiment = "all";
    int n = 128;
    int m = 256;
    double horizon = 1.0;
    double p = 2.0;
    std::uint64_t seed = 42;
    int trials = 200;
    int subset_k = 8;
    std::vector<int> sweep_grids = {32, 64, 128};
    std::string out_dir = "out";
    // sampling specs
    double r_min = 1e-2;
    double r_max = 1e4;
    int n_radii = 25;
    int n_angles = 9;
    double lambda_min = 10.0;
    double lambda_max = 1e6;
    int lambda_count = 60;
    double alpha = 0.5;  // feedback half-plane
    std::map<std::string, double> tolerance_overrides;  // keys "tol.<check>"

    double tol(const std::string& check, double fallback) const {
        auto it = tolerance_overrides.find(check);
        return it == tolerance_overrides.end() ? fallback : it->second;
    }
};

/// Parse a config file; empty file yields all defaults. Errors carry the line number.
ExperimentConfig parse_config(const std::string& path);

/// Parse from already-loaded text (used by parse_config and the tests).
ExperimentConfig parse_config_text(const std::string& text);

}  // namespace maxreglab
