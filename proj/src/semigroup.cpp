#include "maxreglab/semigroup.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace maxreglab {

namespace {

double inf_norm(const Mat& M) { return M.cwiseAbs().rowwise().sum().maxCoeff(); }

// Pade-13 coefficients (Higham 2005).
constexpr double kPade13[] = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};

}  // namespace

Mat expm_dense(const Mat& M) {
    const int d = static_cast<int>(M.rows());
    const double norm = inf_norm(M);
    int squarings = 0;
    Mat A = M;
    const double theta13 = 5.371920351148152;
    if (norm > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
        A /= std::pow(2.0, squarings);
    }
    const Mat A2 = A * A;
    const Mat A4 = A2 * A2;
    const Mat A6 = A2 * A4;
    const Mat I = Mat::Identity(d, d);
    Mat U = A * (A6 * (kPade13[13] * A6 + kPade13[11] * A4 + kPade13[9] * A2) +
                 kPade13[7] * A6 + kPade13[5] * A4 + kPade13[3] * A2 + kPade13[1] * I);
    Mat V = A6 * (kPade13[12] * A6 + kPade13[10] * A4 + kPade13[8] * A2) +
            kPade13[6] * A6 + kPade13[4] * A4 + kPade13[2] * A2 + kPade13[0] * I;
    Mat R = Eigen::PartialPivLU<Mat>(V - U).solve(V + U);
    for (int s = 0; s < squarings; ++s) R = R * R;
    return R;
}

Mat phi1_dense(const Mat& M) {
    const int d = static_cast<int>(M.rows());
    const double norm = inf_norm(M);
    const Mat I = Mat::Identity(d, d);
    if (norm < 1e-3) {  // series with rigorous tail bound at this norm
        Mat acc = I;
        Mat term = I;
        for (int k = 2; k <= 8; ++k) {
            term = term * (M / static_cast<double>(k));
            acc += term;
        }
        return acc;
    }
    // invertibility probe: LU of M with reciprocal condition estimate
    Eigen::PartialPivLU<Mat> lu(M);
    const double rcond = lu.rcond();
    if (rcond > 1e-8) {
        return lu.solve(expm_dense(M) - I);
    }
    // augmented block: exp([[M, I], [0, 0]]) = [[e^M, phi1(M)], [0, I]]
    Mat aug = Mat::Zero(2 * d, 2 * d);
    aug.topLeftCorner(d, d) = M;
    aug.topRightCorner(d, d) = I;
    return expm_dense(aug).topRightCorner(d, d);
}

LinearMap expm(const LinearMap& map, double t) {
    if (t < 0.0) throw std::invalid_argument("expm requires t >= 0");
    const Mat& block = map.reduced ? *map.reduced : map.full;
    if (t * inf_norm(block) > 1e4)
        throw std::invalid_argument("expm rejected: t * ||map|| exceeds 1e4");
    LinearMap out;
    out.grid = map.grid;
    out.tag = map.tag + "-exp";
    if (map.reduced) {
        out.reduced = expm_dense(t * *map.reduced);
        out.prolong = map.prolong;
        const int n = map.grid.n;
        out.full = Mat::Zero(n + 1, n + 1);
        out.full.block(0, 1, n + 1, n - 1) = map.prolong->cast<Complex>() * *out.reduced;
    } else {
        out.full = expm_dense(t * map.full);
    }
    return out;
}

namespace {

void check_stability(const LinearMap& map, double horizon) {
    const double a = spectral_abscissa(map);
    if (a * horizon > 30.0)
        throw std::invalid_argument(
            "generator unstable over this horizon; apply a spectral shift first (abscissa " +
            std::to_string(a) + ")");
}

}  // namespace

TimeSignal mild_solution(const LinearMap& map, const TimeSignal& f, const GridFunction& x0) {
    if (f.grid.n != map.grid.n) throw std::invalid_argument("forcing lives on a different grid");
    check_stability(map, f.tgrid.horizon);
    const int m = f.tgrid.m;
    const int n = map.grid.n;
    const double dt = f.tgrid.dt;
    Mat out(n + 1, m + 1);
    if (map.reduced) {
        const Mat E = expm_dense(dt * *map.reduced);
        const Mat P = phi1_dense(dt * *map.reduced);
        const Mat S = map.prolong->cast<Complex>();
        Vec z = x0.values.segment(1, n - 1);
        out.col(0) = S * z;
        for (int k = 0; k < m; ++k) {
            const Vec u = 0.5 * (f.frames.col(k).segment(1, n - 1) +
                                 f.frames.col(k + 1).segment(1, n - 1));
            z = E * z + dt * (P * u);
            out.col(k + 1) = S * z;
        }
    } else {
        const Mat E = expm_dense(dt * map.full);
        const Mat P = phi1_dense(dt * map.full);
        Vec z = x0.values;
        out.col(0) = z;
        for (int k = 0; k < m; ++k) {
            const Vec u = 0.5 * (f.frames.col(k) + f.frames.col(k + 1));
            z = E * z + dt * (P * u);
            out.col(k + 1) = z;
        }
    }
    return {f.tgrid, map.grid, std::move(out)};
}

Propagator make_propagator(const LinearMap& map, const TimeGrid& tg) {
    Propagator prop;
    prop.generator = map;
    prop.omega = 1.0 + std::max(0.0, spectral_abscissa(map));
    prop.dt = tg.dt;
    const LinearMap sh = shifted(map, prop.omega);
    if (spectral_abscissa(sh) >= 0.0)
        throw std::runtime_error("propagator invariant violated: shifted abscissa not negative");
    const Mat& block = sh.reduced ? *sh.reduced : sh.full;
    prop.step_exponential = expm_dense(tg.dt * block);
    prop.step_phi1 = phi1_dense(tg.dt * block);
    return prop;
}

LinearMap yosida_matrix(const LinearMap& map, double n) {
    LinearMap out;
    out.grid = map.grid;
    out.tag = map.tag + "-yosida";
    const int dim = map.dim();
    const Mat R = resolvent_matrix(map, Complex(n, 0.0));
    out.full = n * n * R - n * Mat::Identity(dim, dim);
    if (map.reduced) {
        const int d = static_cast<int>(map.reduced->rows());
        Mat Mr = -*map.reduced;
        for (int i = 0; i < d; ++i) Mr(i, i) += n;
        Mat Rint = Eigen::PartialPivLU<Mat>(Mr).solve(Mat::Identity(d, d));
        out.reduced = n * n * Rint - n * Mat::Identity(d, d);
        out.prolong = map.prolong;
    }
    return out;
}

double yosida_decomposition_residual(const ExtendedSystem& sys, double n) {
    const Grid& grid = sys.grid;
    const int d = grid.n - 1;
    const LinearMap& A = sys.free_generator;
    const LinearMap& C = sys.closed_loop_generator;
    auto interior_resolvent = [&](const LinearMap& map) {
        Mat M = -*map.reduced;
        for (int i = 0; i < d; ++i) M(i, i) += n;
        Eigen::PartialPivLU<Mat> lu(M);
        Mat R = lu.solve(Mat::Identity(d, d));
        R += lu.solve(Mat::Identity(d, d) - M * R);  // one refinement pass
        return R;
    };
    const Mat Ra = interior_resolvent(A);
    const Mat Rc = interior_resolvent(C);
    const Mat lhs = n * n * Rc - n * Mat::Identity(d, d);

    const DirichletMap dm = dirichlet_map(sys, Complex(n, 0.0));
    const Complex kd = sys.jump(dm.profile.values);
    if (std::abs(1.0 - kd) <= 1e-12)
        throw std::invalid_argument("feedback singular at n = " + std::to_string(n));
    const Vec d_int = dm.profile.values.segment(1, d);
    // jump functional restricted to the free-generator subspace
    const Vec jumpA = (sys.jump_row.weights.transpose() * *A.prolong).transpose().cast<Complex>();
    const Mat rhs = n * (*A.reduced * Ra) +
                    (n * n / (1.0 - kd)) * (d_int * (jumpA.transpose() * Ra));
    return reduced_opnorm(lhs - rhs, grid);
}

double vcf_residual(const ExtendedSystem& sys, const GridFunction& x0, const TimeSignal& f,
                    const std::vector<Complex>& lambda_samples) {
    const int m = f.tgrid.m;
    const double dt = f.tgrid.dt;
    double worst = 0.0;
    for (Complex lam : lambda_samples) {
        Vec fhat = Vec::Zero(sys.grid.num_nodes());
        for (int k = 0; k <= m; ++k) {
            const double w = (k == 0 || k == m) ? 0.5 * dt : dt;
            fhat += w * std::exp(-lam * f.tgrid.node(k)) * f.frames.col(k);
        }
        const GridFunction fh{sys.grid, fhat};
        const Vec zhat =
            resolvent_apply(sys.closed_loop_generator, lam, {sys.grid, x0.values + fhat}).values;
        const Vec via_free = resolvent_apply(sys.free_generator, lam, x0).values +
                             sys.jump(zhat) * dirichlet_map(sys, lam).profile.values +
                             resolvent_apply(sys.free_generator, lam, fh).values;
        worst = std::max(worst, lp_norm(sys.grid, zhat - via_free, 2.0));
    }
    return worst;
}

double perturbed_mild_residual(const ExtendedSystem& sys, const LinearMap& P, const TimeSignal& f) {
    const LinearMap gen = add_perturbation(sys.closed_loop_generator, P);
    const GridFunction zero{sys.grid, Vec::Zero(sys.grid.num_nodes())};
    const TimeSignal z = mild_solution(gen, f, zero);
    TimeSignal driven = f;
    for (int k = 0; k <= f.tgrid.m; ++k) driven.frames.col(k) += P.full * z.frames.col(k);
    const TimeSignal z2 = mild_solution(sys.closed_loop_generator, driven, zero);
    double worst = 0.0;
    for (int k = 0; k <= f.tgrid.m; ++k)
        worst = std::max(worst, lp_norm(sys.grid, z.frames.col(k) - z2.frames.col(k), 2.0));
    return worst;
}

}  // namespace maxreglab
