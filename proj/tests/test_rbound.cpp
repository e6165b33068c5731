#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "maxreglab/rbound.hpp"

#include <cmath>

using namespace maxreglab;

namespace {

constexpr double kPi = 3.14159265358979323846;

OperatorFamily identity_family(const Grid& g, Complex c) {
    OperatorFamily fam;
    fam.label = "scaled identity";
    fam.grid = g;
    fam.members.push_back(c * Mat::Identity(g.num_nodes(), g.num_nodes()));
    fam.parameters.push_back(std::abs(c));
    return fam;
}

}  // namespace

TEST_CASE("identity family has unit ratios") {
    const Grid g = make_grid(16);
    const RBoundReport rep = rbound_estimate(identity_family(g, 1.0), 1, 40, 42);
    for (double r : rep.ratios) CHECK(r == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.max_ratio == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("singleton scaled identity returns its modulus exactly") {
    const Grid g = make_grid(16);
    const RBoundReport rep = rbound_estimate(identity_family(g, {1.5, -2.0}), 1, 40, 7);
    const double c = std::abs(Complex(1.5, -2.0));
    CHECK(rep.max_ratio == doctest::Approx(c).epsilon(1e-12));
    CHECK(rep.estimate >= rep.member_norm_max - 1e-6);
}

TEST_CASE("ratios are deterministic and scale with the family") {
    const ExtendedSystem sys = assemble_extended(make_grid(32));
    const LinearMap sh = shifted(sys.free_generator, 1.0);
    const OperatorFamily fam = weis_family(sh, 0.1, 100.0, 12);
    const RBoundReport a = rbound_estimate(fam, 4, 60, 999);
    const RBoundReport b = rbound_estimate(fam, 4, 60, 999);
    REQUIRE(a.ratios.size() == b.ratios.size());
    for (std::size_t i = 0; i < a.ratios.size(); ++i) CHECK(a.ratios[i] == b.ratios[i]);

    OperatorFamily scaled = fam;
    const double c = 3.7;
    for (Mat& M : scaled.members) M *= c;
    const RBoundReport s = rbound_estimate(scaled, 4, 60, 999);
    CHECK(s.max_ratio == doctest::Approx(c * a.max_ratio).epsilon(1e-8));
}

TEST_CASE("imaginary-axis family of the shifted free generator is tame") {
    const ExtendedSystem sys = assemble_extended(make_grid(64));
    const LinearMap sh = shifted(sys.free_generator, 1.0);
    const OperatorFamily fam = weis_family(sh, 0.1, 1e3, 40);
    const RBoundReport a = rbound_estimate(fam, 8, 120, 42);
    const RBoundReport b = rbound_estimate(fam, 8, 120, 43);
    CHECK(a.max_ratio <= 1.2);
    CHECK(b.max_ratio <= 1.2);
    CHECK(std::abs(a.max_ratio - b.max_ratio) / std::max(a.max_ratio, b.max_ratio) <= 0.2);
    // the sampled member norms lower-bound the estimate
    CHECK(a.estimate >= a.member_norm_max - 1e-6);
}

TEST_CASE("boundary families give finite seed-stable estimates") {
    const ExtendedSystem sys = assemble_extended(make_grid(64));
    const double omega = default_family_shift(sys);
    for (const OperatorFamily& fam :
         {dirichlet_family(sys, omega, 2.0, 0.1, 1e3, 24),
          observation_family(sys, omega, 2.0, 0.1, 1e3, 24),
          dirichlet_family_real(sys, 0.1, 1e3, 24), observation_family_real(sys, 0.1, 1e3, 24)}) {
        const RBoundReport a = rbound_estimate(fam, 8, 100, 42);
        const RBoundReport b = rbound_estimate(fam, 8, 100, 43);
        CHECK(a.estimate > 0.0);
        CHECK(std::isfinite(a.estimate));
        CHECK(std::abs(a.estimate - b.estimate) / std::max(a.estimate, b.estimate) <= 0.2);
    }
}

TEST_CASE("sector sup of the zero map matches the scalar formula") {
    const Grid g = make_grid(16);
    LinearMap zero;
    zero.grid = g;
    zero.full = Mat::Zero(g.num_nodes(), g.num_nodes());
    zero.tag = "zero";
    const std::vector<Complex> samples = half_plane_samples(-1.0, 0.1, 100.0, 10, 5);
    const SectorReport rep = sector_sup(zero, -1.0, samples);
    double oracle = 0.0;
    for (Complex lam : samples) oracle = std::max(oracle, std::abs(lam + 1.0) / std::abs(lam));
    CHECK(rep.sup == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("shifted free sector sup obeys the self-adjoint bound") {
    const ExtendedSystem sys = assemble_extended(make_grid(64));
    const LinearMap sh = shifted(sys.free_generator, 1.0);
    const std::vector<Complex> samples = half_plane_samples(0.0, 1e-2, 1e4, 25, 9);
    const SectorReport rep = sector_sup(sh, 0.0, samples);
    CHECK(rep.sup <= 1.0 + 1e-6);
    CHECK(rep.samples.size() >= 200);
}

TEST_CASE("sector sup is monotone under sample inclusion") {
    const ExtendedSystem sys = assemble_extended(make_grid(32));
    const LinearMap sh = shifted(sys.closed_loop_generator, 1.0);
    const std::vector<Complex> small = half_plane_samples(0.0, 0.1, 100.0, 8, 5);
    std::vector<Complex> big = small;
    const std::vector<Complex> extra = half_plane_samples(0.0, 0.05, 2000.0, 9, 7);
    big.insert(big.end(), extra.begin(), extra.end());
    CHECK(sector_sup(sh, 0.0, small).sup <= sector_sup(sh, 0.0, big).sup + 1e-12);
}

TEST_CASE("admissibility suprema") {
    const ExtendedSystem sys = assemble_extended(make_grid(64));
    const std::vector<Complex> samples = half_plane_samples(0.0, 1e-2, 1e4, 20, 7);
    const AdmissibilityReport rep = admissibility_sup(sys, 2.0, samples);
    CHECK(rep.sup_observation > 0.0);
    CHECK(rep.sup_control > 0.0);
    CHECK(std::isfinite(rep.sup_observation));
    CHECK(std::isfinite(rep.sup_control));
    // zero feedback kills the observation supremum
    const AdmissibilityReport zrep = admissibility_sup(sys.with_zero_jump(), 2.0, samples);
    CHECK(zrep.sup_observation == 0.0);
    // scaled observation value decays along the large real axis
    double prev = kInfinity;
    for (double z : {1e2, 1e3, 1e4}) {
        const AdmissibilityReport r = admissibility_sup(sys, 2.0, {Complex(z, 0.0)});
        CHECK(r.sup_observation < prev);
        prev = r.sup_observation;
    }
    // suprema are monotone under sample-set inclusion
    std::vector<Complex> more = samples;
    const std::vector<Complex> extra = half_plane_samples(0.0, 0.05, 2e3, 9, 5);
    more.insert(more.end(), extra.begin(), extra.end());
    const AdmissibilityReport bigger = admissibility_sup(sys, 2.0, more);
    CHECK(rep.sup_observation <= bigger.sup_observation + 1e-12);
    CHECK(rep.sup_control <= bigger.sup_control + 1e-12);
}

TEST_CASE("feedback sup") {
    const ExtendedSystem sys = assemble_extended(make_grid(128));
    std::vector<Complex> samples = half_plane_samples(0.5, 1e-2, 1e4, 15, 5);
    samples.push_back({1.0, 0.0});
    const SectorReport rep = feedback_sup(sys, 0.5, samples);
    CHECK(std::isfinite(rep.sup));
    const double oracle = 1.0 / std::abs(1.0 - (std::cosh(1.0) - 1.0) / std::sinh(1.0));
    CHECK(oracle == doctest::Approx(1.8592).epsilon(1e-4));
    // the sample at lambda = 1 reproduces the closed-form gain
    const Complex kd1 = transfer_value(sys, {1.0, 0.0});
    CHECK(1.0 / std::abs(1.0 - kd1) == doctest::Approx(oracle).epsilon(1e-3));
    // 1/nu lower-bounds the feedback margin on every sample
    for (const SectorSample& s : rep.samples)
        CHECK(1.0 / rep.sup <= std::abs(1.0 - transfer_value(sys, s.point)) + 1e-12);
    // zero feedback: nu = 1 exactly
    const SectorReport zrep = feedback_sup(sys.with_zero_jump(), 0.5, samples);
    CHECK(zrep.sup == doctest::Approx(1.0).epsilon(1e-14));
    // transfer decays to zero at the far end of the axis
    CHECK(std::abs(transfer_value(sys, {1e4, 0.0})) < 0.02);
}

TEST_CASE("kappa growth diagnostics") {
    const ExtendedSystem sys = assemble_extended(make_grid(64));
    const KappaReport rep = kappa_growth(sys, 2.0, 10.0, 1e6, 60);
    CHECK(rep.slope_lambda_dirichlet == doctest::Approx(0.25).epsilon(0.2));
    CHECK(rep.slope_lambda_dirichlet >= 0.20);
    CHECK(rep.slope_lambda_dirichlet <= 0.30);
    CHECK(rep.slope_dirichlet >= -0.80);
    CHECK(rep.slope_dirichlet <= -0.70);
    CHECK(rep.sup_scaled >= 0.6);
    CHECK(rep.sup_scaled <= 0.8);
    CHECK(std::abs(rep.sup_scaled - rep.sup_scaled_refined) / rep.sup_scaled_refined <= 0.10);
    CHECK(rep.discrete_subrange_slope >= 0.15);
    CHECK(rep.discrete_subrange_slope <= 0.35);
}

TEST_CASE("yosida term norms split exactly") {
    const ExtendedSystem sys = assemble_extended(make_grid(64));
    const TimeGrid tg = make_time_grid(1.0, 64);
    const TimeSignal f = sample_signal(sys.grid, tg, [](double t, double s) {
        return std::exp(-t) * (1.0 + 0.5 * std::cos(kPi * s));
    });
    const YosidaTermNorms terms = yosida_term_norms(sys, 100.0, f, 2.0);
    CHECK(terms.residual <= 1e-8);
    CHECK(terms.direct > 0.0);

    const YosidaTermNorms zterms = yosida_term_norms(sys.with_zero_jump(), 100.0, f, 2.0);
    CHECK(zterms.term2 == 0.0);
    CHECK(zterms.term3 <= 1e-14);
    CHECK(zterms.term4 == 0.0);
}

TEST_CASE("yosida feedback terms grow no faster than the scaled boundary gain") {
    // the raw feedback terms diverge with the approximation parameter (the
    // unscaled boundary gain is unbounded here); dividing by n^{(p-1)/(2p)}
    // tames the growth to a bounded drift across three decades
    const ExtendedSystem sys = assemble_extended(make_grid(64));
    const TimeGrid tg = make_time_grid(1.0, 64);
    const TimeSignal f = sample_signal(sys.grid, tg, [](double t, double s) {
        return std::exp(-t) * (1.0 + 0.5 * std::cos(kPi * s));
    });
    const double nf = bochner_norm(f, 2.0);
    double prev2 = 0.0, prev4 = 0.0;
    bool first = true;
    for (double n : {1e2, 1e3, 1e4}) {
        const YosidaTermNorms y = yosida_term_norms(sys, n, f, 2.0);
        CHECK(y.residual <= 1e-8);
        const double scale = std::pow(n, 0.25);
        const double c2 = y.term2 / (nf * scale);
        const double c4 = y.term4 / (nf * scale);
        if (!first) {
            CHECK(c2 <= 2.0 * prev2);
            CHECK(c4 <= 2.0 * prev4);
        }
        prev2 = c2;
        prev4 = c4;
        first = false;
    }
}
