#pragma once

#include "maxreglab/maxreg.hpp"

#include <functional>
#include <utility>

namespace maxreglab {

/// Time-dependent scalar coefficient a(t) >= alpha_floor > 0 on [0, T].
struct CoefficientProfile {
    std::function<double(double)> a;
    double alpha_floor = 0.0;

    double operator()(double t) const { return a(t); }
};

CoefficientProfile make_coefficient_profile(std::function<double(double)> a, double alpha_floor);

/// Throws when a sampled value drops below the floor; returns the largest
/// increment between adjacent samples (a continuity proxy).
double validate_profile(const CoefficientProfile& prof, const TimeGrid& tg, int samples = 2048);

/// Exponential-midpoint stepping for z' = a(t) * gen z + f with the
/// closed-loop generator; order 2 in dt.
TimeSignal nonauto_solve(const ExtendedSystem& sys, const CoefficientProfile& prof,
                         const TimeSignal& f, const GridFunction& x0);

/// Regularity constants of the non-autonomous trajectory (x0 = 0);
/// norm_gen_z is || a(.) * gen z ||.
MaxRegReport nonauto_maxreg_report(const ExtendedSystem& sys, const CoefficientProfile& prof,
                                   const TimeSignal& f, double p);

/// Residual of the domain-factorization identity at a frozen time t:
/// (a A - mu0)(I - D_{mu0/a} jump) = (a A_cl - mu0) on the closed-loop
/// subspace; measured as a lumped operator norm over that subspace.
double nonauto_identity_residual(const ExtendedSystem& sys, const CoefficientProfile& prof,
                                 double mu0, double t);

/// (||a(t)Acl - a(s)Acl|| in the graph norm of a(0)Acl,
///  ||a(t)A   - a(s)A  || in the graph norm of a(0)A); first <= second.
std::pair<double, double> continuity_bound_check(const ExtendedSystem& sys,
                                                 const CoefficientProfile& prof, double t, double s,
                                                 double mu0);

}  // namespace maxreglab
