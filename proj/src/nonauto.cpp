#include "maxreglab/nonauto.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>
#include <stdexcept>

namespace maxreglab {

CoefficientProfile make_coefficient_profile(std::function<double(double)> a, double alpha_floor) {
    if (!a) throw std::invalid_argument("coefficient profile needs an evaluation rule");
    if (!(alpha_floor > 0.0)) throw std::invalid_argument("coefficient floor must be positive");
    return {std::move(a), alpha_floor};
}

double validate_profile(const CoefficientProfile& prof, const TimeGrid& tg, int samples) {
    double max_increment = 0.0;
    double prev = prof(0.0);
    for (int i = 0; i <= samples; ++i) {
        const double t = tg.horizon * double(i) / samples;
        const double v = prof(t);
        if (!(v >= prof.alpha_floor))
            throw std::invalid_argument("coefficient drops below its floor at t = " +
                                        std::to_string(t));
        max_increment = std::max(max_increment, std::abs(v - prev));
        prev = v;
    }
    return max_increment;
}

TimeSignal nonauto_solve(const ExtendedSystem& sys, const CoefficientProfile& prof,
                         const TimeSignal& f, const GridFunction& x0) {
    validate_profile(prof, f.tgrid);
    const LinearMap& gen = sys.closed_loop_generator;
    if (spectral_abscissa(gen) * prof(0.0) * f.tgrid.horizon > 30.0)
        throw std::invalid_argument("generator unstable over this horizon; shift first");
    const int n = sys.grid.n;
    const int d = n - 1;
    const int m = f.tgrid.m;
    const double dt = f.tgrid.dt;

    // a(t) scales one fixed operator, so diagonalize once and step with scalar
    // exponentials; fall back to per-step dense exponentials if the basis is bad.
    Eigen::ComplexEigenSolver<Mat> es(*gen.reduced);
    bool use_eigen = es.info() == Eigen::Success;
    Eigen::PartialPivLU<Mat> vlu;
    if (use_eigen) {
        vlu.compute(es.eigenvectors());
        use_eigen = vlu.rcond() > 1e-10;
    }
    const Mat S = gen.prolong->cast<Complex>();
    Mat out(n + 1, m + 1);
    Vec z = x0.values.segment(1, d);
    out.col(0) = S * z;
    for (int k = 0; k < m; ++k) {
        const double am = prof((k + 0.5) * dt);
        const Vec u =
            0.5 * (f.frames.col(k).segment(1, d) + f.frames.col(k + 1).segment(1, d));
        if (use_eigen) {
            const Vec lam = es.eigenvalues();
            Vec zh = vlu.solve(z);
            Vec uh = vlu.solve(u);
            for (int i = 0; i < d; ++i) {
                const Complex w = dt * am * lam[i];
                const Complex e = std::exp(w);
                const Complex p = std::abs(w) < 1e-8 ? 1.0 + w / 2.0 : (e - 1.0) / w;
                zh[i] = e * zh[i] + dt * p * uh[i];
            }
            z = es.eigenvectors() * zh;
        } else {
            const Mat E = expm_dense(dt * am * *gen.reduced);
            const Mat P = phi1_dense(dt * am * *gen.reduced);
            z = E * z + dt * (P * u);
        }
        out.col(k + 1) = S * z;
    }
    return {f.tgrid, sys.grid, std::move(out)};
}

MaxRegReport nonauto_maxreg_report(const ExtendedSystem& sys, const CoefficientProfile& prof,
                                   const TimeSignal& f, double p) {
    MaxRegReport rep;
    rep.p = p;
    rep.horizon = f.tgrid.horizon;
    rep.generator_tag = "a(t) * closed_loop";
    rep.norm_f = bochner_norm(f, p);
    if (rep.norm_f <= 0.0) throw std::invalid_argument("zero forcing");
    const GridFunction zero{sys.grid, Vec::Zero(sys.grid.num_nodes())};
    const TimeSignal z = nonauto_solve(sys, prof, f, zero);
    const TimeSignal dz = time_derivative(z);
    TimeSignal gz = z;
    for (int k = 0; k <= z.tgrid.m; ++k)
        gz.frames.col(k) = prof(z.tgrid.node(k)) * (sys.closed_loop_generator.full * z.frames.col(k));
    rep.norm_z = bochner_norm(z, p);
    rep.norm_dz = bochner_norm(dz, p);
    rep.norm_gen_z = bochner_norm(gz, p);
    TimeSignal resid = dz;
    resid.frames -= gz.frames + f.frames;
    rep.equation_residual = bochner_norm(resid, p);
    rep.ratio = (rep.norm_dz + rep.norm_z + rep.norm_gen_z) / rep.norm_f;
    return rep;
}

double nonauto_identity_residual(const ExtendedSystem& sys, const CoefficientProfile& prof,
                                 double mu0, double t) {
    const double a = prof(t);
    const int n = sys.grid.n;
    const int d = n - 1;
    const LinearMap& A = sys.free_generator;
    const LinearMap& C = sys.closed_loop_generator;
    // the matched profile: kernel of (mu0 - a A_m) is the kernel at mu0/a
    const Vec dk = dirichlet_map(sys, Complex(mu0 / a, 0.0)).profile.values;
    const Mat Sc = C.prolong->cast<Complex>();
    const Vec jumpC = (sys.jump_row.weights.transpose().cast<Complex>() * Sc).transpose();
    Mat diff(d, d);
    for (int j = 0; j < d; ++j) {
        Vec x_int = Vec::Zero(d);
        x_int[j] = 1.0;
        const Vec xfull = Sc * x_int;
        const Vec y = xfull - jumpC[j] * dk;  // lands on the free subspace
        const Vec lhs = a * (*A.reduced * y.segment(1, d)) - mu0 * y.segment(1, d);
        const Vec rhs = a * (*C.reduced * x_int) - mu0 * x_int;
        diff.col(j) = lhs - rhs;
    }
    return reduced_opnorm(diff, sys.grid);
}

std::pair<double, double> continuity_bound_check(const ExtendedSystem& sys,
                                                 const CoefficientProfile& prof, double t, double s,
                                                 double mu0) {
    const double a0 = prof(0.0);
    const double da = std::abs(prof(t) - prof(s));
    const int d = sys.grid.n - 1;
    const LinearMap& A = sys.free_generator;
    const LinearMap& C = sys.closed_loop_generator;
    const Vec dk = dirichlet_map(sys, Complex(mu0 / a0, 0.0)).profile.values;
    const Vec jumpC =
        (sys.jump_row.weights.transpose().cast<Complex>() * C.prolong->cast<Complex>()).transpose();
    const Mat P = Mat::Identity(d, d) - dk.segment(1, d) * jumpC.transpose();

    const Mat Nc = mu0 * Mat::Identity(d, d) - a0 * *C.reduced;
    const Mat Na = mu0 * Mat::Identity(d, d) - a0 * *A.reduced;
    const Mat first_mat = (*A.reduced * P) * Eigen::PartialPivLU<Mat>(Nc).solve(Mat::Identity(d, d));
    const Mat second_mat = *A.reduced * Eigen::PartialPivLU<Mat>(Na).solve(Mat::Identity(d, d));
    return {da * reduced_opnorm(first_mat, sys.grid), da * reduced_opnorm(second_mat, sys.grid)};
}

}  // namespace maxreglab
