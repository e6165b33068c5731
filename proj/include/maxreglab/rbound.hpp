#pragma once

#include "maxreglab/maxreg.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace maxreglab {

/// A sampled operator family. Members are dense matrices whose shape fixes the
/// spaces: (n+1)x(n+1) state-to-state, (n+1)x1 boundary-to-state (profiles),
/// 1x(n+1) state-to-boundary (functionals).
struct OperatorFamily {
    std::string label;
    Grid grid;
    std::vector<Mat> members;
    std::vector<double> parameters;  // the s (or |z|) value behind each member
    double scaling_exponent = 0.0;   // recorded exponent of the s-scaling
};

struct RBoundReport {
    std::string label;
    int trials = 0;
    std::vector<double> ratios;      // one per successful trial
    double max_ratio = 0.0;
    double percentile95 = 0.0;
    double member_norm_max = 0.0;    // singleton lower bound
    double estimate = 0.0;           // max(max_ratio, member_norm_max)
    int redraws = 0;                 // degenerate denominators redrawn
    std::uint64_t seed = 0;
};

/// Monte Carlo randomized-sum ratio estimate: per trial draw k members and k
/// random inputs, average || sum r_j T_j x_j || / || sum r_j x_j || over 64
/// Rademacher sign vectors (paired), report max and 95th percentile.
RBoundReport rbound_estimate(const OperatorFamily& fam, int k, int trials, std::uint64_t seed);

struct SectorSample {
    Complex point;
    double value = 0.0;
};

enum class SectorQuantity { SectorSup, AdmissibilityObservation, AdmissibilityControl,
                            FeedbackSup, KappaGrowth };

struct SectorReport {
    SectorQuantity quantity;
    double sup = 0.0;
    Complex arg_sup;
    std::vector<SectorSample> samples;
    double fitted_exponent = 0.0;    // kappa growth only
    int skipped = 0;                 // samples rejected (spectrum hits)
};

/// Log-radial samples lambda = beta + r e^{i theta} over a right half-plane.
std::vector<Complex> half_plane_samples(double beta, double r_min, double r_max, int n_radii,
                                        int n_angles);

/// sup |lambda - beta| ||R(lambda, map)|| over the samples, lumped-interior
/// operator norm for eliminated generators.
SectorReport sector_sup(const LinearMap& map, double beta, const std::vector<Complex>& samples);

struct AdmissibilityReport {
    double p = 2.0;
    double sup_observation = 0.0;  // sup |z|^{1/q} || jump . R(z+omega, A) ||
    double sup_control = 0.0;      // sup |z|^{1/p} || D_{z+omega} ||_p
    double omega = 0.0;
};

/// Both admissibility suprema with q = p/(p-1), resolvents taken at z + omega
/// (omega = 1 + max of the two spectral abscissas) so the shifted semigroup is
/// uniformly stable over C_0.
AdmissibilityReport admissibility_sup(const ExtendedSystem& sys, double p,
                                      const std::vector<Complex>& samples);

struct KappaReport {
    double p = 2.0;
    double slope_lambda_dirichlet = 0.0;   // log ||lambda D_lambda|| vs log lambda
    double slope_dirichlet = 0.0;          // log ||D_lambda|| vs log lambda
    double sup_scaled = 0.0;               // sup lambda^{(p+1)/(2p)} ||D_lambda||
    double sup_scaled_refined = 0.0;       // same with doubled sample density
    double discrete_subrange_slope = 0.0;  // grid profiles on lambda <= 0.1/h^2
};

/// Growth diagnostics of the Dirichlet profile norm over real lambda in
/// [lambda_min, lambda_max]. Profile norms come from the closed form (the
/// uniform grid cannot resolve the layer for lambda >> 1/h^2); the discrete
/// subrange slope cross-checks the grid profiles where they are resolvable.
KappaReport kappa_growth(const ExtendedSystem& sys, double p, double lambda_min,
                         double lambda_max, int count);

/// sup over samples in C_alpha of |1 - jump(D_lambda)|^{-1} (scalar feedback).
SectorReport feedback_sup(const ExtendedSystem& sys, double alpha,
                          const std::vector<Complex>& samples);

struct YosidaTermNorms {
    double term1 = 0.0;  // free-resolvent part of the convolution with f
    double term2 = 0.0;  // rank-one feedback correction of the same
    double term3 = 0.0;  // free-resolvent part of the feedback convolution
    double term4 = 0.0;  // rank-one correction of the feedback convolution
    double direct = 0.0; // || A_n z || with z the closed-loop convolution
    double residual = 0.0;  // Bochner norm of (sum of terms - direct)
};

/// Bochner L^p norms of the four-way split of A_n * (closed-loop convolution of f).
YosidaTermNorms yosida_term_norms(const ExtendedSystem& sys, double n, const TimeSignal& f,
                                  double p);

// --- family builders ----------------------------------------------------------

/// {s R(is, map)} for log-spaced s (map already shifted).
OperatorFamily weis_family(const LinearMap& map, double s_min, double s_max, int count);

/// {s^{1/p} D_{omega+is}} profiles.
OperatorFamily dirichlet_family(const ExtendedSystem& sys, double omega, double p, double s_min,
                                double s_max, int count);

/// {s^{1/q} jump . R(omega+is, A)} functionals.
OperatorFamily observation_family(const ExtendedSystem& sys, double omega, double p, double s_min,
                                  double s_max, int count);

/// Shifted real-axis variants {sqrt(s) D_{s+1}} and {sqrt(s) jump . R(s+1, A)}.
OperatorFamily dirichlet_family_real(const ExtendedSystem& sys, double s_min, double s_max,
                                     int count);
OperatorFamily observation_family_real(const ExtendedSystem& sys, double s_min, double s_max,
                                       int count);

double default_family_shift(const ExtendedSystem& sys);

}  // namespace maxreglab
