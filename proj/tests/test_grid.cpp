#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "maxreglab/grid.hpp"

#include <cmath>
#include <random>

using namespace maxreglab;

TEST_CASE("make_grid spacing and preconditions") {
    CHECK(make_grid(8).h == 0.125);
    CHECK(make_grid(128).h == 0.0078125);
    CHECK(make_grid(64).h * 64 == 1.0);
    CHECK_THROWS_WITH_AS(make_grid(4), doctest::Contains("grid too coarse"),
                         std::invalid_argument);
}

TEST_CASE("trapezoid weights sum to one exactly") {
    const Grid g = make_grid(97);
    CHECK(trapezoid_weights(g).sum() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("lp_norm on reference functions") {
    const Grid g = make_grid(128);
    const GridFunction zero = sample(g, [](double) { return 0.0; });
    const GridFunction one = sample(g, [](double) { return 1.0; });
    CHECK(lp_norm(zero, 2.0) == 0.0);
    for (double p : {1.0, 2.0, 3.7}) CHECK(lp_norm(one, p) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(lp_norm(one, kInfinity) == doctest::Approx(1.0));

    // g(s) = s at p = 2: exact integral of s^2 is 1/3
    const GridFunction lin = sample(g, [](double s) { return s; });
    CHECK(lp_norm(lin, 2.0) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-4));

    CHECK_THROWS_AS(lp_norm(one, 0.5), std::invalid_argument);
}

TEST_CASE("lp_norm quadrature is second order") {
    auto err = [](int n) {
        const Grid g = make_grid(n);
        const GridFunction f = sample(g, [](double s) { return std::exp(s); });
        const double exact = std::sqrt((std::exp(2.0) - 1.0) / 2.0);
        return std::abs(lp_norm(f, 2.0) - exact);
    };
    const double ratio = err(64) / err(128);
    CHECK(ratio >= 3.0);
    CHECK(ratio <= 5.0);
}

TEST_CASE("lp_norm properties on random fields") {
    const Grid g = make_grid(64);
    std::mt19937_64 rng(1234);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 25; ++trial) {
        Vec a(g.num_nodes()), b(g.num_nodes());
        for (int j = 0; j < g.num_nodes(); ++j) {
            a[j] = Complex(gauss(rng), gauss(rng));
            b[j] = Complex(gauss(rng), gauss(rng));
        }
        const GridFunction ga{g, a}, gb{g, b};
        const Complex c(gauss(rng), gauss(rng));
        for (double p : {1.0, 1.5, 2.0, 3.0}) {
            const GridFunction scaled{g, c * a};
            CHECK(lp_norm(scaled, p) ==
                  doctest::Approx(std::abs(c) * lp_norm(ga, p)).epsilon(1e-12));
            const GridFunction sum{g, a + b};
            CHECK(lp_norm(sum, p) <= lp_norm(ga, p) + lp_norm(gb, p) + 1e-12);
            CHECK(lp_norm(ga, 1.0) <= lp_norm(ga, p) + 1e-10);
        }
    }
}

TEST_CASE("bochner_norm on reference signals") {
    const Grid g = make_grid(32);
    const TimeGrid tg = make_time_grid(1.0, 128);
    const TimeSignal zero = sample_signal(g, tg, [](double, double) { return 0.0; });
    CHECK(bochner_norm(zero, 2.0) == 0.0);
    const TimeSignal unit = sample_signal(g, tg, [](double, double) { return 1.0; });
    CHECK(bochner_norm(unit, 2.0) == doctest::Approx(1.0).epsilon(1e-13));
    const TimeSignal ramp = sample_signal(g, tg, [](double t, double) { return t; });
    CHECK(bochner_norm(ramp, 2.0) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-4));
}

TEST_CASE("time_derivative stencils") {
    const Grid g = make_grid(16);
    const TimeGrid tg = make_time_grid(1.0, 64);
    const TimeSignal constant = sample_signal(g, tg, [](double, double) { return 2.5; });
    CHECK(bochner_norm(time_derivative(constant), 2.0) == doctest::Approx(0.0).epsilon(1e-12));

    // linear exactness
    const TimeSignal ramp = sample_signal(g, tg, [](double t, double s) { return t * (1 + s); });
    const TimeSignal dr = time_derivative(ramp);
    for (int k = 0; k <= tg.m; ++k)
        for (int j = 0; j <= g.n; ++j)
            CHECK(std::abs(dr.frames(j, k) - Complex(1 + g.node(j))) < 1e-11);

    // quadratic: exact for the 2nd-order stencils, value 2t at every node
    const TimeSignal quad = sample_signal(g, tg, [](double t, double) { return t * t; });
    const TimeSignal dq = time_derivative(quad);
    const int mid = tg.m / 2;
    CHECK(std::abs(dq.frames(3, mid) - Complex(2.0 * tg.node(mid))) < 1e-11);
    CHECK(std::abs(dq.frames(0, 0) - Complex(0.0)) < 1e-11);
    CHECK(std::abs(dq.frames(0, tg.m) - Complex(2.0)) < 1e-10);
}

TEST_CASE("constructor validation") {
    CHECK_THROWS_AS(make_time_grid(1.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(make_time_grid(0.0, 32), std::invalid_argument);
    const Grid g = make_grid(8);
    Vec bad = Vec::Zero(g.num_nodes());
    bad[3] = Complex(std::nan(""), 0.0);
    CHECK_THROWS_AS(make_grid_function(g, bad), std::invalid_argument);
    CHECK_THROWS_AS(make_grid_function(g, Vec::Zero(3)), std::invalid_argument);
}
