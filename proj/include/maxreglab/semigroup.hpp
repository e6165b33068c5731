#pragma once

#include "maxreglab/operators.hpp"

namespace maxreglab {

/// Matrix exponential by Pade scaling-and-squaring (dense, complex).
Mat expm_dense(const Mat& M);

/// phi_1(M) = M^{-1}(e^M - I): truncated series for small norms, LU solve when
/// M is safely invertible, augmented-block exponential otherwise (the free and
/// closed-loop generators have 0 in the spectrum, so the solve route is out).
Mat phi1_dense(const Mat& M);

/// e^{t map}. For boundary-eliminated generators the exponential acts through
/// the interior block and lands on the boundary-condition subspace.
/// Rejects t*||map||_inf > 1e4.
LinearMap expm(const LinearMap& map, double t);

/// One-step exponential recurrence z_{k+1} = E z_k + dt phi_1(dt A) f_{k+1/2},
/// with f sampled at midpoints by averaging adjacent frames.
TimeSignal mild_solution(const LinearMap& map, const TimeSignal& f, const GridFunction& x0);

/// Generator with an explicit stabilizing shift and a cached step exponential.
struct Propagator {
    LinearMap generator;       // the original (unshifted) map
    double omega = 0.0;        // shift; spectral abscissa of (generator - omega) < 0
    double dt = 0.0;
    Mat step_exponential;      // e^{dt (A - omega)} on the evolved block
    Mat step_phi1;             // phi_1(dt (A - omega))

    LinearMap shifted_map() const { return shifted(generator, omega); }
};

/// omega = 1 + max(0, spectral abscissa), per-step matrices cached for tg.dt.
Propagator make_propagator(const LinearMap& map, const TimeGrid& tg);

/// n^2 R(n, map) - n I  (equals n map R(n, map)).
LinearMap yosida_matrix(const LinearMap& map, double n);

/// Operator-norm residual of the split of the closed-loop Yosida approximant
/// into free-generator terms plus the rank-one boundary feedback correction,
/// measured on the interior block.
double yosida_decomposition_residual(const ExtendedSystem& sys, double n);

/// Laplace-side residual of the variation-of-constants relation:
/// max over lambda samples of || zhat - (R(l,A)x0 + D_l jump(zhat) + R(l,A) fhat) ||
/// with zhat = R(l, closed-loop)(x0 + fhat) and fhat the trapezoid transform of f.
double vcf_residual(const ExtendedSystem& sys, const GridFunction& x0, const TimeSignal& f,
                    const std::vector<Complex>& lambda_samples);

/// Max-over-time grid-norm gap between the trajectory generated by (closed-loop + P)
/// and the closed-loop trajectory re-driven by P z + f.
double perturbed_mild_residual(const ExtendedSystem& sys, const LinearMap& P, const TimeSignal& f);

}  // namespace maxreglab
