#pragma once

#include "maxreglab/semigroup.hpp"

#include <cstdint>
#include <vector>

namespace maxreglab {

/// Per-trajectory regularity constants for z' = Gen z + f, z(0) = 0.
struct MaxRegReport {
    double p = 2.0;
    double horizon = 1.0;
    double norm_dz = 0.0;    // ||z'||
    double norm_z = 0.0;     // ||z||
    double norm_gen_z = 0.0; // ||Gen z||
    double norm_f = 0.0;     // ||f||
    double ratio = 0.0;      // (||z'|| + ||z|| + ||Gen z||) / ||f||
    double equation_residual = 0.0;  // ||z' - Gen z - f|| (discretization check)
    std::string generator_tag;
};

MaxRegReport maxreg_report(const LinearMap& map, const TimeSignal& f, double p);

enum class RNormMethod { ExactP2, RandomSearch };

struct RNormEstimate {
    RNormMethod method = RNormMethod::ExactP2;
    double value = 0.0;  // ExactP2: discrete operator norm; RandomSearch: certified lower bound
    int iterations = 0;  // power-iteration count or trial count
    bool converged = true;
};

/// Norm of the discrete map f -> Gen * (mild solution of z' = Gen z + f, z(0)=0)
/// in L^p([0,T], L^p(0,1)). p = 2: largest singular value of the weighted
/// block-lower-triangular composition via power iteration on the normal
/// operator (tolerance 1e-8, at most 500 iterations; non-convergence is
/// flagged). p != 2: max ratio over random band-limited forcings, a lower bound.
RNormEstimate maxreg_norm_estimate(const LinearMap& map, const TimeGrid& tg, double p,
                                   RNormMethod method, std::uint64_t seed = 0x5eed,
                                   int trials = 200);

enum class GeneratorKind { Free, ClosedLoop, ClosedLoopPerturbed };

struct SweepRow {
    int n = 0;
    double omega = 0.0;
    RNormEstimate estimate;
};

struct SweepTable {
    GeneratorKind kind;
    std::vector<SweepRow> rows;
    bool pass = false;        // successive estimates differ by < 10%
    double max_variation = 0.0;
};

/// One shifted-generator norm estimate per grid size; PASS when the estimates
/// plateau (successive relative change < 10%).
SweepTable maxreg_stability_sweep(GeneratorKind kind, const std::vector<int>& grids,
                                  const TimeGrid& tg, double p);

/// Shifted generator for a sweep entry (shift 1 + max(0, abscissa); the
/// perturbed kind adds b(s) g'(s) with b = 0.3 before shifting).
LinearMap sweep_generator(GeneratorKind kind, const ExtendedSystem& sys,
                          double* omega_out = nullptr);

}  // namespace maxreglab
