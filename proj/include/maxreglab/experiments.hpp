#pragma once

#include "maxreglab/config.hpp"
#include "maxreglab/nonauto.hpp"
#include "maxreglab/rbound.hpp"

#include <string>
#include <vector>

namespace maxreglab {

/// One summary row: PASS iff lower <= measured <= upper.
struct CheckResult {
    std::string name;
    std::string criterion;  // acceptance criterion identifier (AC1..AC11)
    double measured = 0.0;
    double lower = -kInfinity;
    double upper = kInfinity;
    bool pass = false;
};

CheckResult make_check(std::string name, std::string criterion, double measured, double lower,
                       double upper);

struct ExperimentOutput {
    std::string experiment;
    std::vector<CheckResult> checks;
    double runtime_seconds = 0.0;  // wall time; reported in the meta sidecar only
    bool all_pass() const;
};

/// Smallest positive root of tan(nu/2) = nu by bisection on (2, 3); the
/// slowest-decaying non-constant closed-loop mode is -nu*^2.
double feedback_mode_root();

// per-experiment suites (deterministic given cfg)
ExperimentOutput run_identities(const ExperimentConfig& cfg);
ExperimentOutput run_spectra(const ExperimentConfig& cfg);
ExperimentOutput run_dirichlet(const ExperimentConfig& cfg);
ExperimentOutput run_sector(const ExperimentConfig& cfg);
ExperimentOutput run_admissibility(const ExperimentConfig& cfg);
ExperimentOutput run_kappa(const ExperimentConfig& cfg);
ExperimentOutput run_rbound(const ExperimentConfig& cfg);
ExperimentOutput run_maxreg(const ExperimentConfig& cfg);
ExperimentOutput run_perturbed(const ExperimentConfig& cfg);
ExperimentOutput run_nonauto(const ExperimentConfig& cfg);
ExperimentOutput run_example_pde(const ExperimentConfig& cfg);

/// Dispatch by cfg.experiment ("all" runs every suite).
std::vector<ExperimentOutput> run_suites(const ExperimentConfig& cfg);

/// Deterministic CSV body for an experiment (17 significant digits).
std::string render_csv(const ExperimentOutput& out);

/// Sidecar text: seed, grids, versions, timestamp.
std::string render_meta(const ExperimentConfig& cfg, const ExperimentOutput& out);

struct RunStatus {
    int exit_code = 0;  // 0 ok, 3 check failure, 4 numerical failure, 6 unwritable output
    std::string message;
    std::vector<ExperimentOutput> outputs;
};

/// Execute cfg and write <experiment>.csv / <experiment>.meta under cfg.out_dir.
RunStatus run_experiment(const ExperimentConfig& cfg);

inline constexpr const char* kVersion = "0.1.0";

}  // namespace maxreglab
