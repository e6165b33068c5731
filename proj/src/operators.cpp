#include "maxreglab/operators.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace maxreglab {

namespace {

std::string fmt_complex(Complex z) {
    std::ostringstream os;
    os << z.real();
    if (z.imag() != 0.0) os << (z.imag() > 0 ? "+" : "") << z.imag() << "i";
    return os.str();
}

/// (n+1)^2 matrix [left row; lambda I - T interior; flux row (- jump row)].
Mat extended_matrix(const ExtendedSystem& sys, Complex lambda, BoundaryCondition bc) {
    const int n = sys.grid.n;
    Mat M = Mat::Zero(n + 1, n + 1);
    M.row(0) = sys.left_neumann.weights.transpose().cast<Complex>();
    M.block(1, 0, n - 1, n + 1) = -sys.interior.cast<Complex>();
    for (int j = 1; j < n; ++j) M(j, j) += lambda;
    RealVec last = sys.flux_row.weights;
    if (bc == BoundaryCondition::ClosedLoop) last -= sys.jump_row.weights;
    M.row(n) = last.transpose().cast<Complex>();
    return M;
}

Vec eigenvalues_sorted(const Mat& M) {
    Eigen::ComplexEigenSolver<Mat> es(M, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigenvalue solver failed");
    Vec ev = es.eigenvalues();
    std::sort(ev.data(), ev.data() + ev.size(),
              [](Complex a, Complex b) { return a.real() > b.real(); });
    return ev;
}

double nearest_eigenvalue_distance(const Vec& eigs, Complex lambda, Complex* nearest) {
    double best = kInfinity;
    for (int i = 0; i < eigs.size(); ++i) {
        const double d = std::abs(eigs[i] - lambda);
        if (d < best) {
            best = d;
            if (nearest) *nearest = eigs[i];
        }
    }
    return best;
}

void check_off_spectrum(const LinearMap& map, Complex lambda) {
    if (!map.eigenvalues) return;
    Complex nearest;
    const double dist = nearest_eigenvalue_distance(*map.eigenvalues, lambda, &nearest);
    if (dist <= 1e-8 * (1.0 + std::abs(lambda)))
        throw std::invalid_argument("lambda within tolerance of discrete spectrum of " + map.tag +
                                    "; nearest eigenvalue " + fmt_complex(nearest));
}

}  // namespace

GridFunction LinearMap::apply(const GridFunction& g) const { return {grid, full * g.values}; }
Vec LinearMap::apply(const Vec& g) const { return full * g; }

RealMat first_derivative_matrix(const Grid& grid) {
    const int n = grid.n;
    const double h = grid.h;
    RealMat D = RealMat::Zero(n + 1, n + 1);
    D(0, 0) = -3.0 / (2 * h); D(0, 1) = 4.0 / (2 * h); D(0, 2) = -1.0 / (2 * h);
    for (int j = 1; j < n; ++j) {
        D(j, j - 1) = -1.0 / (2 * h);
        D(j, j + 1) = 1.0 / (2 * h);
    }
    D(n, n - 2) = 1.0 / (2 * h); D(n, n - 1) = -4.0 / (2 * h); D(n, n) = 3.0 / (2 * h);
    return D;
}

RealMat second_derivative_matrix(const Grid& grid) {
    const int n = grid.n;
    const double h2 = grid.h * grid.h;
    RealMat D = RealMat::Zero(n + 1, n + 1);
    D(0, 0) = 2.0 / h2; D(0, 1) = -5.0 / h2; D(0, 2) = 4.0 / h2; D(0, 3) = -1.0 / h2;
    for (int j = 1; j < n; ++j) {
        D(j, j - 1) = 1.0 / h2;
        D(j, j) = -2.0 / h2;
        D(j, j + 1) = 1.0 / h2;
    }
    D(n, n - 3) = -1.0 / h2; D(n, n - 2) = 4.0 / h2; D(n, n - 1) = -5.0 / h2; D(n, n) = 2.0 / h2;
    return D;
}

RealVec lumped_interior_weights(const Grid& grid) {
    RealVec w = RealVec::Constant(grid.n - 1, grid.h);
    w[0] *= 1.5;
    w[grid.n - 2] *= 1.5;
    return w;
}

namespace {

/// Slaving map S: interior values -> full grid, endpoint values taken from the
/// boundary equations (left Neumann row; flux row = 0 or flux row = jump row).
RealMat slaving_map(const Grid& grid, BoundaryCondition bc) {
    const int n = grid.n;
    const double h = grid.h;
    RealMat S = RealMat::Zero(n + 1, n - 1);
    S.block(1, 0, n - 1, n - 1).setIdentity();
    // -3 g0 + 4 g1 - g2 = 0
    S(0, 0) = 4.0 / 3.0;
    S(0, 1) = -1.0 / 3.0;
    if (bc == BoundaryCondition::Free) {
        // g_{n-2} - 4 g_{n-1} + 3 g_n = 0
        S(n, n - 2) = 4.0 / 3.0;
        S(n, n - 3) = -1.0 / 3.0;
    } else {
        // g_{n-2} - 4 g_{n-1} + 3 g_n = 2h (g_n - g_0)
        S(n, n - 2) = 4.0 / (3.0 - 2.0 * h);
        S(n, n - 3) = -1.0 / (3.0 - 2.0 * h);
        S.row(n) += (-2.0 * h / (3.0 - 2.0 * h)) * S.row(0);
    }
    return S;
}

RealMat interior_stencil(const Grid& grid) {
    const int n = grid.n;
    const double h2 = grid.h * grid.h;
    RealMat T = RealMat::Zero(n - 1, n + 1);
    for (int j = 1; j < n; ++j) {
        T(j - 1, j - 1) = 1.0 / h2;
        T(j - 1, j) = -2.0 / h2;
        T(j - 1, j + 1) = 1.0 / h2;
    }
    return T;
}

LinearMap build_generator(const Grid& grid, const RealMat& interior, BoundaryCondition bc,
                          const std::string& tag) {
    const int n = grid.n;
    const RealMat S = slaving_map(grid, bc);
    const RealMat reduced_real = interior * S;
    LinearMap map;
    map.grid = grid;
    map.reduced = reduced_real.cast<Complex>();
    map.prolong = S;
    map.full = Mat::Zero(n + 1, n + 1);
    map.full.block(0, 1, n + 1, n - 1) = (S * reduced_real).cast<Complex>();
    map.tag = tag;
    map.eigenvalues = eigenvalues_sorted(*map.reduced);
    return map;
}

}  // namespace

ExtendedSystem assemble_extended(const Grid& grid) {
    if (grid.n < 8) throw std::invalid_argument("grid too coarse: n must be >= 8");
    const int n = grid.n;
    const double h = grid.h;
    ExtendedSystem sys;
    sys.grid = grid;
    sys.left_neumann.weights = RealVec::Zero(n + 1);
    sys.left_neumann.weights[0] = -3.0 / (2 * h);
    sys.left_neumann.weights[1] = 4.0 / (2 * h);
    sys.left_neumann.weights[2] = -1.0 / (2 * h);
    sys.flux_row.weights = RealVec::Zero(n + 1);
    sys.flux_row.weights[n - 2] = 1.0 / (2 * h);
    sys.flux_row.weights[n - 1] = -4.0 / (2 * h);
    sys.flux_row.weights[n] = 3.0 / (2 * h);
    sys.jump_row.weights = RealVec::Zero(n + 1);
    sys.jump_row.weights[0] = -1.0;
    sys.jump_row.weights[n] = 1.0;
    sys.interior = interior_stencil(grid);
    sys.free_generator = build_generator(grid, sys.interior, BoundaryCondition::Free, "free");
    sys.closed_loop_generator =
        build_generator(grid, sys.interior, BoundaryCondition::ClosedLoop, "closed_loop");
    return sys;
}

ExtendedSystem ExtendedSystem::with_zero_jump() const {
    ExtendedSystem sys = *this;
    sys.jump_row.weights = RealVec::Zero(grid.n + 1);
    sys.closed_loop_generator = sys.free_generator;
    sys.closed_loop_generator.tag = "closed_loop(jump=0)";
    return sys;
}

LinearMap generator_matrix(const ExtendedSystem& sys, BoundaryCondition bc) {
    return sys.generator(bc);
}

DirichletMap dirichlet_map(const ExtendedSystem& sys, Complex lambda) {
    const int n = sys.grid.n;
    Complex nearest;
    const double dist =
        nearest_eigenvalue_distance(*sys.free_generator.eigenvalues, lambda, &nearest);
    if (dist <= 1e-8)
        throw std::invalid_argument("lambda within tolerance of discrete spectrum; nearest eigenvalue " +
                                    fmt_complex(nearest));
    Mat M = extended_matrix(sys, lambda, BoundaryCondition::Free);
    Vec rhs = Vec::Zero(n + 1);
    rhs[n] = 1.0;
    Eigen::PartialPivLU<Mat> lu(M);
    Vec profile = lu.solve(rhs);
    DirichletMap out{lambda, {sys.grid, std::move(profile)}, {}};
    if (dist <= 1e-2 * (1.0 + std::abs(lambda))) {
        out.warning = "conditioning warning: lambda is within " + std::to_string(dist) +
                      " of the discrete eigenvalue " + fmt_complex(nearest);
    }
    return out;
}

Complex dirichlet_closed_form(Complex lambda, double s) {
    if (lambda.imag() == 0.0 && lambda.real() <= 0.0)
        throw std::invalid_argument("dirichlet_closed_form: lambda on the branch cut (-inf, 0]");
    const Complex a = std::sqrt(lambda);  // principal branch, Re a > 0
    // cosh(a s)/(a sinh a) = (e^{a(s-1)} + e^{-a(s+1)}) / (a (1 - e^{-2a}))
    return (std::exp(a * (s - 1.0)) + std::exp(-a * (s + 1.0))) / (a * (1.0 - std::exp(-2.0 * a)));
}

double dirichlet_closed_form_norm2(double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("norm formula requires lambda > 0");
    const double a = std::sqrt(lambda);
    const double em = std::exp(-2.0 * a);
    const double inv_sinh2 = 4.0 * em / ((1.0 - em) * (1.0 - em));
    const double coth = (1.0 + em) / (1.0 - em);
    return std::sqrt(0.5 * inv_sinh2 / lambda + coth / (2.0 * a * lambda));
}

namespace {

// |cosh(a s)/(a sinh a)|^p integrated with the substitution u = a(1-s); the
// integrand decays like e^{-pu}, so a fixed panel count in u resolves the layer.
double layer_quadrature_norm(double a, double lambda, double p) {
    const double cut = std::min(a, 60.0 / std::max(p, 1.0));
    const int panels = 512;
    const double du = cut / panels;
    auto integrand = [&](double u) {
        const double em2a = std::exp(-2.0 * a);
        const double val = (std::exp(-u) + std::exp(u - 2.0 * a)) / (1.0 - em2a);
        return std::pow(val, p);
    };
    double acc = 0.0;
    for (int i = 0; i < panels; ++i) {
        const double u0 = i * du, u1 = u0 + du;
        acc += (du / 6.0) * (integrand(u0) + 4.0 * integrand(0.5 * (u0 + u1)) + integrand(u1));
    }
    return std::pow(acc / a, 1.0 / p) / std::sqrt(lambda);
}

}  // namespace

double dirichlet_closed_form_norm(double lambda, double p) {
    if (p == 2.0) return dirichlet_closed_form_norm2(lambda);
    if (!(lambda > 0.0) || !(p >= 1.0)) throw std::invalid_argument("requires lambda > 0 and p >= 1");
    return layer_quadrature_norm(std::sqrt(lambda), lambda, p);
}

GridFunction resolvent_apply(const LinearMap& map, Complex lambda, const GridFunction& f) {
    check_off_spectrum(map, lambda);
    const int n = map.grid.n;
    if (map.reduced) {
        const int d = static_cast<int>(map.reduced->rows());
        Mat M = -*map.reduced;
        for (int i = 0; i < d; ++i) M(i, i) += lambda;
        Vec x_int = Eigen::PartialPivLU<Mat>(M).solve(f.values.segment(1, n - 1));
        return {map.grid, map.prolong->cast<Complex>() * x_int};
    }
    Mat M = -map.full;
    for (int i = 0; i < map.dim(); ++i) M(i, i) += lambda;
    Eigen::PartialPivLU<Mat> lu(M);
    Vec x = lu.solve(f.values);
    if (!x.allFinite()) throw std::runtime_error("resolvent solve produced non-finite values");
    return {map.grid, std::move(x)};
}

Mat resolvent_matrix(const LinearMap& map, Complex lambda) {
    check_off_spectrum(map, lambda);
    const int n = map.grid.n;
    if (map.reduced) {
        const int d = static_cast<int>(map.reduced->rows());
        Mat M = -*map.reduced;
        for (int i = 0; i < d; ++i) M(i, i) += lambda;
        Mat R_int = Eigen::PartialPivLU<Mat>(M).solve(Mat::Identity(d, d));
        Mat R = Mat::Zero(n + 1, n + 1);
        R.block(0, 1, n + 1, d) = map.prolong->cast<Complex>() * R_int;
        return R;
    }
    Mat M = -map.full;
    for (int i = 0; i < map.dim(); ++i) M(i, i) += lambda;
    return Eigen::PartialPivLU<Mat>(M).solve(Mat::Identity(map.dim(), map.dim()));
}

ResolventIdentityReport resolvent_identity_residual(const ExtendedSystem& sys, Complex lambda) {
    const int n = sys.grid.n;
    const Mat Ra = resolvent_matrix(sys.free_generator, lambda);
    const Mat Rc = resolvent_matrix(sys.closed_loop_generator, lambda);
    const DirichletMap dm = dirichlet_map(sys, lambda);
    const Vec& d = dm.profile.values;
    const Complex kd = sys.jump(d);
    if (std::abs(1.0 - kd) <= 1e-12)
        throw std::invalid_argument("feedback singular at lambda = " + fmt_complex(lambda));

    const Vec k = sys.jump_row.weights.cast<Complex>();
    Mat feedback = Mat::Identity(n + 1, n + 1) - d * k.transpose();
    Mat factored = Eigen::PartialPivLU<Mat>(std::move(feedback)).solve(Ra);
    Mat additive = Ra + d * ((k.transpose() * Ra) / (1.0 - kd));

    ResolventIdentityReport rep;
    rep.factored_form = full_opnorm(Rc - factored, sys.grid);
    rep.additive_form = full_opnorm(Rc - additive, sys.grid);
    return rep;
}

double greiner_residual(const ExtendedSystem& sys, Complex lambda, Complex mu) {
    const GridFunction dl = dirichlet_map(sys, lambda).profile;
    const GridFunction dmu = dirichlet_map(sys, mu).profile;
    const GridFunction r = resolvent_apply(sys.free_generator, lambda, dmu);
    const Vec rhs = dmu.values - (lambda - mu) * r.values;
    return lp_norm(sys.grid, dl.values - rhs, 2.0);
}

Complex transfer_value(const ExtendedSystem& sys, Complex lambda) {
    return sys.jump(dirichlet_map(sys, lambda).profile.values);
}

LinearMap perturbation_matrix(const Grid& grid, const GridFunction& b, const GridFunction& c) {
    if (b.values.size() != grid.num_nodes() || c.values.size() != grid.num_nodes())
        throw std::invalid_argument("coefficient functions must live on the given grid");
    const RealMat D1 = first_derivative_matrix(grid);
    LinearMap map;
    map.grid = grid;
    map.full = b.values.asDiagonal() * D1.cast<Complex>();
    map.full += Mat(c.values.asDiagonal());
    map.tag = "perturbation";
    return map;
}

std::vector<Complex> spectrum(const LinearMap& map) {
    Vec ev = map.eigenvalues ? *map.eigenvalues
                             : eigenvalues_sorted(map.reduced ? *map.reduced : map.full);
    return {ev.data(), ev.data() + ev.size()};
}

double spectral_abscissa(const LinearMap& map) {
    const std::vector<Complex> ev = spectrum(map);
    double a = -kInfinity;
    for (Complex z : ev) a = std::max(a, z.real());
    return a;
}

LinearMap add_perturbation(const LinearMap& gen, const LinearMap& P) {
    if (!gen.reduced)
        throw std::invalid_argument("add_perturbation expects a boundary-eliminated generator");
    const int n = gen.grid.n;
    LinearMap out;
    out.grid = gen.grid;
    out.prolong = gen.prolong;
    // P folded onto the generator's domain: interior rows with slaved endpoints.
    Mat P_fold = P.full.block(1, 0, n - 1, n + 1) * gen.prolong->cast<Complex>();
    out.reduced = *gen.reduced + P_fold;
    out.full = Mat::Zero(n + 1, n + 1);
    out.full.block(0, 1, n + 1, n - 1) = gen.prolong->cast<Complex>() * *out.reduced;
    out.tag = gen.tag + "+perturbation";
    out.eigenvalues = eigenvalues_sorted(*out.reduced);
    return out;
}

LinearMap shifted(const LinearMap& map, double omega) {
    LinearMap out = map;
    out.tag = map.tag + "-shifted";
    if (map.reduced) {
        out.reduced = *map.reduced - omega * Mat::Identity(map.reduced->rows(), map.reduced->cols());
        out.full.setZero();
        out.full.block(0, 1, map.grid.n + 1, map.grid.n - 1) =
            map.prolong->cast<Complex>() * *out.reduced;
    } else {
        out.full = map.full - omega * Mat::Identity(map.dim(), map.dim());
    }
    if (map.eigenvalues) out.eigenvalues = *map.eigenvalues - omega * Vec::Ones(map.eigenvalues->size());
    return out;
}

double weighted_opnorm(const Mat& M, const RealVec& w_out, const RealVec& w_in, double tol,
                       int max_iter) {
    const int din = static_cast<int>(M.cols());
    Vec x(din);
    for (int i = 0; i < din; ++i)  // deterministic, loosely spread start vector
        x[i] = Complex(std::cos(0.7 * i + 0.3), std::sin(1.3 * i + 0.1));
    double sigma = 0.0;
    const Mat Mh = M.adjoint();
    for (int it = 0; it < max_iter; ++it) {
        Vec y = M * x;
        const double num = (w_out.array() * y.cwiseAbs2().array()).sum();
        const double den = (w_in.array() * x.cwiseAbs2().array()).sum();
        if (den <= 0.0) return 0.0;
        const double s = std::sqrt(num / den);
        Vec g = Mh * (w_out.asDiagonal() * y);
        x = (g.array() / w_in.array().cast<Complex>()).matrix();
        const double nx = std::sqrt((w_in.array() * x.cwiseAbs2().array()).sum());
        if (nx == 0.0) return 0.0;
        x /= nx;
        if (std::abs(s - sigma) <= tol * std::max(1.0, s)) return s;
        sigma = s;
    }
    return sigma;
}

double reduced_opnorm(const Mat& M, const Grid& grid) {
    const RealVec w = lumped_interior_weights(grid);
    return weighted_opnorm(M, w, w);
}

double full_opnorm(const Mat& M, const Grid& grid) {
    const RealVec w = trapezoid_weights(grid);
    return weighted_opnorm(M, w, w);
}

}  // namespace maxreglab
