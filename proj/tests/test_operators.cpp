#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "maxreglab/operators.hpp"
#include "test_oracles.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <random>

using namespace maxreglab;

namespace {

constexpr double kPi = 3.14159265358979323846;

GridFunction band_limited(const Grid& g, std::mt19937_64& rng, int modes = 10) {
    std::normal_distribution<double> gauss;
    Vec v = Vec::Zero(g.num_nodes());
    for (int j = 0; j < modes; ++j) {
        const Complex c(gauss(rng), gauss(rng));
        for (int i = 0; i <= g.n; ++i) v[i] += c * std::cos(j * kPi * g.node(i));
    }
    return {g, v};
}

}  // namespace

TEST_CASE("boundary rows are exact on low-degree polynomials") {
    const ExtendedSystem sys = assemble_extended(make_grid(32));
    const GridFunction one = sample(sys.grid, [](double) { return 1.0; });
    const GridFunction sq = sample(sys.grid, [](double s) { return s * s; });
    CHECK(std::abs(sys.jump_row.value(one)) == 0.0);
    CHECK(std::abs(sys.flux_row.value(sq) - 2.0) < 1e-11);       // (s^2)'(1) = 2
    CHECK(std::abs(sys.left_neumann.value(sq)) < 1e-11);         // (s^2)'(0) = 0
    // interior stencil row on s^2 gives the exact second derivative
    const Vec Tsq = sys.interior.cast<Complex>() * sq.values;
    for (int j = 0; j < sys.grid.n - 1; ++j) CHECK(std::abs(Tsq[j] - 2.0) < 1e-9);
}

TEST_CASE("free generator spectrum approaches the Neumann eigenvalues") {
    const ExtendedSystem sys = assemble_extended(make_grid(128));
    const auto ev = spectrum(sys.free_generator);
    CHECK(std::abs(ev[0]) < 1e-8);
    CHECK(std::abs(ev[1] + kPi * kPi) / (kPi * kPi) < 0.005);
    CHECK(std::abs(ev[2] + 4 * kPi * kPi) / (4 * kPi * kPi) < 0.005);
}

TEST_CASE("closed-loop generator: constants and the feedback mode") {
    const ExtendedSystem sys = assemble_extended(make_grid(128));
    const GridFunction one = sample(sys.grid, [](double) { return 1.0; });
    const GridFunction img = sys.closed_loop_generator.apply(one);
    CHECK(lp_norm(img, 2.0) < 1e-9);

    const double nu = testoracle::feedback_root();
    CHECK(nu == doctest::Approx(2.331).epsilon(5e-4));
    const auto ev = spectrum(sys.closed_loop_generator);
    CHECK(std::abs(ev[0]) < 1e-8);
    CHECK(std::abs(ev[1] + nu * nu) / (nu * nu) < 0.01);
    CHECK(std::abs(ev[2] + 4 * kPi * kPi) / (4 * kPi * kPi) < 0.01);
}

TEST_CASE("eliminated free stencil is self-adjoint in the lumped inner product") {
    const Grid g = make_grid(64);
    const ExtendedSystem sys = assemble_extended(g);
    const RealVec w = lumped_interior_weights(g);
    const Mat A = *sys.free_generator.reduced;
    const Mat sym = w.cwiseSqrt().asDiagonal() * A * w.cwiseSqrt().cwiseInverse().asDiagonal();
    CHECK((sym - sym.adjoint()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("dirichlet map satisfies its defining rows") {
    const ExtendedSystem sys = assemble_extended(make_grid(128));
    for (Complex lam : {Complex(1, 0), Complex(2, 3), Complex(50, 0)}) {
        const DirichletMap dm = dirichlet_map(sys, lam);
        CHECK(std::abs(sys.flux_row.value(dm.profile) - 1.0) < 1e-10);
        CHECK(std::abs(sys.left_neumann.value(dm.profile)) < 1e-10);
        const Vec interior = sys.interior.cast<Complex>() * dm.profile.values;
        for (int j = 0; j < sys.grid.n - 1; ++j)
            CHECK(std::abs(lam * dm.profile.values[j + 1] - interior[j]) <=
                  1e-10 * (1.0 + std::abs(lam)));
    }
}

TEST_CASE("dirichlet map against the closed form") {
    const ExtendedSystem sys = assemble_extended(make_grid(128));
    const DirichletMap dm = dirichlet_map(sys, {1.0, 0.0});
    CHECK(std::abs(dm.profile.values[0] - 1.0 / std::sinh(1.0)) < 1e-3);
    CHECK(std::abs(dm.profile.values[0]) == doctest::Approx(0.85092).epsilon(1e-3));
    // closed form values
    CHECK(std::abs(dirichlet_closed_form({1, 0}, 1.0) - std::cosh(1.0) / std::sinh(1.0)) < 1e-12);
    CHECK(std::abs(dirichlet_closed_form({1, 0}, 0.0) - 1.0 / std::sinh(1.0)) < 1e-12);
    // derivative at s = 1 is 1 for any lambda (defining property)
    for (Complex lam : {Complex(1, 0), Complex(2, 3)}) {
        const double eps = 1e-6;
        const Complex d = (dirichlet_closed_form(lam, 1.0) - dirichlet_closed_form(lam, 1.0 - eps)) /
                          eps;
        CHECK(std::abs(d - 1.0) < 1e-4);
    }
    CHECK_THROWS_AS(dirichlet_closed_form({-1.0, 0.0}, 0.5), std::invalid_argument);
}

TEST_CASE("dirichlet map near the discrete spectrum warns or rejects") {
    const ExtendedSystem sys = assemble_extended(make_grid(128));
    bool flagged = false;
    try {
        const DirichletMap dm = dirichlet_map(sys, {-kPi * kPi + 1e-12, 0.0});
        flagged = !dm.warning.empty();
    } catch (const std::invalid_argument&) {
        flagged = true;
    }
    CHECK(flagged);
}

TEST_CASE("resolvent_apply basics") {
    const Grid g = make_grid(32);
    LinearMap zero;
    zero.grid = g;
    zero.full = Mat::Zero(g.num_nodes(), g.num_nodes());
    zero.tag = "zero";
    std::mt19937_64 rng(7);
    const GridFunction f = band_limited(g, rng);
    const GridFunction r = resolvent_apply(zero, {1.0, 0.0}, f);
    CHECK((r.values - f.values).cwiseAbs().maxCoeff() < 1e-13);

    const ExtendedSystem sys = assemble_extended(make_grid(128));
    const GridFunction one = sample(sys.grid, [](double) { return 1.0; });
    const GridFunction r1 = resolvent_apply(sys.free_generator, {1.0, 0.0}, one);
    CHECK((r1.values - one.values).cwiseAbs().maxCoeff() < 1e-10);

    const GridFunction cosf = sample(sys.grid, [](double s) { return std::cos(kPi * s); });
    const GridFunction r2 = resolvent_apply(sys.free_generator, {1.0, 0.0}, cosf);
    const double scale = 1.0 / (1.0 + kPi * kPi);
    double err = 0.0;
    for (int j = 0; j <= sys.grid.n; ++j)
        err = std::max(err, std::abs(r2.values[j] - scale * cosf.values[j]));
    CHECK(err < 5e-4);
}

TEST_CASE("closed-loop resolvent factorization is exact algebra") {
    const ExtendedSystem sys = assemble_extended(make_grid(128));
    for (Complex lam : {Complex(1, 0), Complex(2, 3), Complex(50, 0)}) {
        const ResolventIdentityReport rep = resolvent_identity_residual(sys, lam);
        CHECK(rep.factored_form <= 1e-10);
        CHECK(rep.additive_form <= 1e-10);
    }
    const ExtendedSystem zsys = sys.with_zero_jump();
    CHECK(resolvent_identity_residual(zsys, {1, 0}).worst() <= 1e-14);
}

TEST_CASE("resolvent regularity matches the scalar feedback test") {
    // lambda lies in the discrete closed-loop resolvent set iff 1 - jump(D_lambda) != 0
    const ExtendedSystem sys = assemble_extended(make_grid(64));
    const auto ev = spectrum(sys.closed_loop_generator);
    const Complex mode = ev[1];  // the non-constant slow mode
    CHECK(std::abs(1.0 - transfer_value(sys, mode)) < 1e-6);

    const Mat& red = *sys.closed_loop_generator.reduced;
    auto sigma_min = [&](Complex lam) {
        Mat M = -red;
        for (int i = 0; i < red.rows(); ++i) M(i, i) += lam;
        Eigen::JacobiSVD<Mat> svd(M);
        return svd.singularValues().minCoeff();
    };
    CHECK(sigma_min(mode) < 1e-5);
    for (Complex lam : {Complex(1, 0), mode + Complex(1.0, 0.0), Complex(3, 2)}) {
        CHECK(std::abs(1.0 - transfer_value(sys, lam)) > 1e-3);
        CHECK(sigma_min(lam) > 1e-3);
    }
}

TEST_CASE("identities hold at random points of the right half-plane") {
    const ExtendedSystem sys = assemble_extended(make_grid(64));
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> re(1.0, 60.0), im(-30.0, 30.0);
    for (int trial = 0; trial < 10; ++trial) {
        const Complex lam(re(rng), im(rng));
        const Complex mu(re(rng), im(rng));
        CHECK(resolvent_identity_residual(sys, lam).worst() <= 1e-10);
        CHECK(greiner_residual(sys, lam, mu) <= 1e-10);
        const DirichletMap dm = dirichlet_map(sys, lam);
        CHECK(std::abs(sys.flux_row.value(dm.profile) - 1.0) < 1e-10);
        CHECK(std::abs(sys.left_neumann.value(dm.profile)) < 1e-10);
    }
}

TEST_CASE("dirichlet profiles satisfy the two-resolvent relation") {
    const ExtendedSystem sys = assemble_extended(make_grid(128));
    CHECK(greiner_residual(sys, {2, 0}, {1, 0}) <= 1e-10);
    CHECK(greiner_residual(sys, {1, 0}, {4, 0}) <= 1e-10);
    CHECK(greiner_residual(sys, {2, 3}, {1, 0}) <= 1e-10);
    CHECK(greiner_residual(sys, {1, 0}, {1, 0}) <= 1e-15);
}

TEST_CASE("transfer values and decay") {
    const ExtendedSystem sys = assemble_extended(make_grid(128));
    const double oracle = (std::cosh(1.0) - 1.0) / std::sinh(1.0);
    CHECK(std::abs(transfer_value(sys, {1, 0}) - oracle) < 2e-4);
    CHECK(oracle == doctest::Approx(0.46212).epsilon(1e-4));

    // discrete vs closed form where the grid resolves the layer
    for (double lam : {1.0, 10.0, 100.0}) {
        const double cf = testoracle::transfer_closed_form(lam);
        CHECK(std::abs(transfer_value(sys, {lam, 0}).real() - cf) / cf < 0.01);
    }
    // closed-form log-log slope over [1e2, 1e6]
    std::vector<double> lx, ly;
    for (int i = 0; i < 40; ++i) {
        const double lam = 1e2 * std::pow(1e4, i / 39.0);
        lx.push_back(std::log(lam));
        ly.push_back(std::log(testoracle::transfer_closed_form(lam)));
    }
    const double slope = testoracle::fit_slope(lx, ly);
    CHECK(slope == doctest::Approx(-0.5).epsilon(0.1));
}

TEST_CASE("perturbation matrix stencils") {
    const Grid g = make_grid(32);
    const GridFunction zero = sample(g, [](double) { return 0.0; });
    const GridFunction one = sample(g, [](double) { return 1.0; });
    const LinearMap ident = perturbation_matrix(g, zero, one);
    CHECK((ident.full - Mat::Identity(g.num_nodes(), g.num_nodes())).cwiseAbs().maxCoeff() == 0.0);

    const LinearMap ddx = perturbation_matrix(g, one, zero);
    const GridFunction sq = sample(g, [](double s) { return s * s; });
    const GridFunction dsq = ddx.apply(sq);
    for (int j = 0; j <= g.n; ++j) CHECK(std::abs(dsq.values[j] - 2.0 * g.node(j)) < 1e-11);

    const LinearMap null = perturbation_matrix(g, zero, zero);
    CHECK(null.full.cwiseAbs().maxCoeff() == 0.0);
    const auto ev = spectrum(null);
    for (Complex z : ev) CHECK(std::abs(z) < 1e-14);
}

TEST_CASE("example inequalities hold on random smooth fields") {
    const Grid g = make_grid(128);
    const RealMat D1 = first_derivative_matrix(g);
    const RealMat D2 = second_derivative_matrix(g);
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        const GridFunction f = band_limited(g, rng);
        const GridFunction df{g, D1.cast<Complex>() * f.values};
        const GridFunction d2f{g, D2.cast<Complex>() * f.values};
        for (double p : {1.5, 2.0, 3.0}) {
            const double jump = std::abs(f.values[g.n] - f.values[0]);
            CHECK(jump <= lp_norm(df, p) + 1e-8);
            for (double eps : {0.1, 0.5, 1.0})
                CHECK(lp_norm(df, p) <= (9.0 / eps) * lp_norm(f, p) + eps * lp_norm(d2f, p) + 1e-8);
        }
    }
}

TEST_CASE("control operator concentrates at the right endpoint") {
    // <D_lambda, (lambda - A) v> -> v(1) at second order: the adjoint of the
    // boundary insertion is point evaluation at s = 1.
    auto gap = [](int n) {
        const ExtendedSystem sys = assemble_extended(make_grid(n));
        const GridFunction v = sample(sys.grid, [](double s) { return std::cos(kPi * s); });
        const Complex lam(2.0, 0.0);
        const Vec av = sys.free_generator.full * v.values;
        const Vec integrand = lam * v.values - av;
        const Vec d = dirichlet_map(sys, lam).profile.values;
        const RealVec w = trapezoid_weights(sys.grid);
        Complex acc = 0.0;
        for (int j = 0; j <= sys.grid.n; ++j) acc += w[j] * d[j] * integrand[j];
        return std::abs(acc - v.values[sys.grid.n]);
    };
    const double g64 = gap(64), g128 = gap(128);
    CHECK(g128 < 1e-3);
    CHECK(g64 / g128 >= 2.5);
    CHECK(g64 / g128 <= 6.0);
}

TEST_CASE("closed-form dirichlet norms") {
    // p = 2 antiderivative vs layer quadrature
    for (double lam : {10.0, 1e3, 1e6}) {
        const double a = dirichlet_closed_form_norm2(lam);
        const double b = dirichlet_closed_form_norm(lam, 2.0);
        CHECK(a == doctest::Approx(b).epsilon(1e-6));
    }
    // large-lambda asymptotics: lambda^{3/4} ||D|| -> 1/sqrt(2)
    CHECK(std::pow(1e8, 0.75) * dirichlet_closed_form_norm2(1e8) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-3));
}
