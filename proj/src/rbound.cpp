#include "maxreglab/rbound.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace maxreglab {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index) {
    // splitmix64 over (master, index); deterministic regardless of evaluation order
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Vec band_limited_field(std::mt19937_64& rng, const Grid& grid, int modes = 10) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec g = Vec::Zero(grid.num_nodes());
    for (int j = 0; j < modes; ++j) {
        const Complex c(gauss(rng), gauss(rng));
        for (int i = 0; i <= grid.n; ++i) g[i] += c * std::cos(j * kPi * grid.node(i));
    }
    return g;
}

enum class Space { State, Boundary };

Space input_space(const Mat& member) { return member.cols() == 1 ? Space::Boundary : Space::State; }
Space output_space(const Mat& member) { return member.rows() == 1 ? Space::Boundary : Space::State; }

double space_norm(const Vec& v, Space sp, const RealVec& w) {
    if (sp == Space::Boundary) return std::abs(v[0]);
    return std::sqrt((w.array() * v.cwiseAbs2().array()).sum());
}

double member_opnorm(const Mat& member, const RealVec& w) {
    const Space in = input_space(member), out = output_space(member);
    if (in == Space::Boundary && out == Space::State)  // profile: norm is the vector norm
        return space_norm(member.col(0), Space::State, w);
    if (in == Space::State && out == Space::Boundary) {  // functional: weighted dual norm
        double acc = 0.0;
        for (int j = 0; j < member.cols(); ++j) acc += std::norm(member(0, j)) / w[j];
        return std::sqrt(acc);
    }
    if (in == Space::Boundary && out == Space::Boundary) return std::abs(member(0, 0));
    return weighted_opnorm(member, w, w);
}

}  // namespace

RBoundReport rbound_estimate(const OperatorFamily& fam, int k, int trials, std::uint64_t seed) {
    if (fam.members.empty()) throw std::invalid_argument("empty operator family");
    if (k < 1 || k > static_cast<int>(fam.members.size()))
        throw std::invalid_argument("subset size k must be in [1, family size]");
    const Grid& grid = fam.grid;
    const RealVec w = trapezoid_weights(grid);
    const Space in = input_space(fam.members.front());
    const Space out = output_space(fam.members.front());

    RBoundReport rep;
    rep.label = fam.label;
    rep.seed = seed;
    rep.trials = trials;
    for (const Mat& T : fam.members)
        rep.member_norm_max = std::max(rep.member_norm_max, member_opnorm(T, w));

    constexpr int kSignVectors = 64;
    for (int t = 0; t < trials; ++t) {
        std::mt19937_64 rng(trial_seed(seed, static_cast<std::uint64_t>(t)));
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int attempt = 0; attempt < 8; ++attempt) {
            // draw k distinct members
            std::vector<int> idx(fam.members.size());
            std::iota(idx.begin(), idx.end(), 0);
            for (int j = 0; j < k; ++j) {
                std::uniform_int_distribution<int> pick(j, static_cast<int>(idx.size()) - 1);
                std::swap(idx[j], idx[pick(rng)]);
            }
            std::vector<Vec> xs(k), txs(k);
            for (int j = 0; j < k; ++j) {
                const Vec x = in == Space::Boundary
                                  ? Vec::Constant(1, Complex(gauss(rng), gauss(rng)))
                                  : band_limited_field(rng, grid);
                xs[j] = x;
                txs[j] = fam.members[idx[j]] * x;
            }
            double num = 0.0, den = 0.0;
            std::uniform_int_distribution<int> coin(0, 1);
            for (int s = 0; s < kSignVectors; ++s) {
                Vec sn = Vec::Zero(txs[0].size());
                Vec sd = Vec::Zero(xs[0].size());
                for (int j = 0; j < k; ++j) {
                    const double r = coin(rng) ? 1.0 : -1.0;
                    sn += r * txs[j];
                    sd += r * xs[j];
                }
                num += space_norm(sn, out, w);
                den += space_norm(sd, in, w);
            }
            num /= kSignVectors;
            den /= kSignVectors;
            if (den <= 1e-14) {
                ++rep.redraws;
                continue;
            }
            rep.ratios.push_back(num / den);
            break;
        }
    }
    if (rep.ratios.empty()) throw std::runtime_error("all rbound trials degenerate");
    rep.max_ratio = *std::max_element(rep.ratios.begin(), rep.ratios.end());
    std::vector<double> sorted = rep.ratios;
    std::sort(sorted.begin(), sorted.end());
    const double pos = 0.95 * (sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    rep.percentile95 = sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
    rep.estimate = std::max(rep.max_ratio, rep.member_norm_max);
    return rep;
}

std::vector<Complex> half_plane_samples(double beta, double r_min, double r_max, int n_radii,
                                        int n_angles) {
    std::vector<Complex> out;
    out.reserve(static_cast<std::size_t>(n_radii) * n_angles);
    for (int i = 0; i < n_radii; ++i) {
        const double r = r_min * std::pow(r_max / r_min, n_radii == 1 ? 0.0 : double(i) / (n_radii - 1));
        for (int a = 0; a < n_angles; ++a) {
            const double th = n_angles == 1 ? 0.0 : -0.47 * kPi + 0.94 * kPi * a / (n_angles - 1);
            out.push_back(beta + r * std::exp(Complex(0.0, th)));
        }
    }
    return out;
}

SectorReport sector_sup(const LinearMap& map, double beta, const std::vector<Complex>& samples) {
    SectorReport rep;
    rep.quantity = SectorQuantity::SectorSup;
    for (Complex lam : samples) {
        double v;
        try {
            if (map.reduced) {
                const int d = static_cast<int>(map.reduced->rows());
                Mat M = -*map.reduced;
                for (int i = 0; i < d; ++i) M(i, i) += lam;
                const Mat R = Eigen::PartialPivLU<Mat>(M).solve(Mat::Identity(d, d));
                v = std::abs(lam - beta) * reduced_opnorm(R, map.grid);
            } else {
                v = std::abs(lam - beta) * full_opnorm(resolvent_matrix(map, lam), map.grid);
            }
        } catch (const std::exception&) {
            ++rep.skipped;
            continue;
        }
        if (!std::isfinite(v)) {
            ++rep.skipped;
            continue;
        }
        rep.samples.push_back({lam, v});
        if (v > rep.sup) {
            rep.sup = v;
            rep.arg_sup = lam;
        }
    }
    return rep;
}

double default_family_shift(const ExtendedSystem& sys) {
    return 1.0 + std::max({0.0, spectral_abscissa(sys.free_generator),
                           spectral_abscissa(sys.closed_loop_generator)});
}

AdmissibilityReport admissibility_sup(const ExtendedSystem& sys, double p,
                                      const std::vector<Complex>& samples) {
    if (!(p > 1.0)) throw std::invalid_argument("admissibility requires p > 1");
    const double q = p / (p - 1.0);
    AdmissibilityReport rep;
    rep.p = p;
    rep.omega = default_family_shift(sys);
    const Grid& grid = sys.grid;
    const int d = grid.n - 1;
    const LinearMap& A = sys.free_generator;
    const Vec jumpA = (sys.jump_row.weights.transpose() * *A.prolong).transpose().cast<Complex>();
    const RealVec wi = RealVec::Constant(d, grid.h);  // interior trapezoid weights
    for (Complex z : samples) {
        const Complex lam = z + rep.omega;
        const GridFunction prof = dirichlet_map(sys, lam).profile;
        rep.sup_control =
            std::max(rep.sup_control, std::pow(std::abs(z), 1.0 / p) * lp_norm(prof, p));
        Mat M = -*A.reduced;
        for (int i = 0; i < d; ++i) M(i, i) += lam;
        const Vec row = Eigen::PartialPivLU<Mat>(M.transpose()).solve(jumpA);
        // dual norm of the interior functional w.r.t. the weighted l^p norm
        double acc = 0.0;
        for (int j = 0; j < d; ++j) acc += std::pow(std::abs(row[j]), q) * std::pow(wi[j], 1.0 - q);
        rep.sup_observation =
            std::max(rep.sup_observation, std::pow(std::abs(z), 1.0 / q) * std::pow(acc, 1.0 / q));
    }
    return rep;
}

namespace {

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

KappaReport kappa_growth(const ExtendedSystem& sys, double p, double lambda_min, double lambda_max,
                         int count) {
    if (!(lambda_min > 1.0) || !(lambda_max > lambda_min))
        throw std::invalid_argument("kappa_growth expects 1 < lambda_min < lambda_max");
    KappaReport rep;
    rep.p = p;
    const double gamma = (p + 1.0) / (2.0 * p);
    auto sup_scaled = [&](int cnt) {
        double sup = 0.0;
        for (int i = 0; i < cnt; ++i) {
            const double lam = lambda_min * std::pow(lambda_max / lambda_min, double(i) / (cnt - 1));
            sup = std::max(sup, std::pow(lam, gamma) * dirichlet_closed_form_norm(lam, p));
        }
        return sup;
    };
    std::vector<double> lx, ly, lyd;
    for (int i = 0; i < count; ++i) {
        const double lam = lambda_min * std::pow(lambda_max / lambda_min, double(i) / (count - 1));
        const double nrm = dirichlet_closed_form_norm(lam, p);
        lx.push_back(std::log(lam));
        ly.push_back(std::log(lam * nrm));
        lyd.push_back(std::log(nrm));
    }
    rep.slope_lambda_dirichlet = fit_slope(lx, ly);
    rep.slope_dirichlet = fit_slope(lx, lyd);
    rep.sup_scaled = sup_scaled(count);
    rep.sup_scaled_refined = sup_scaled(2 * count);
    // discrete cross-check where the grid resolves the layer
    const double cap = 0.1 / (sys.grid.h * sys.grid.h);
    std::vector<double> dx, dy;
    for (int i = 0; i < count; ++i) {
        const double lam = lambda_min * std::pow(cap / lambda_min, double(i) / (count - 1));
        const GridFunction prof = dirichlet_map(sys, lam).profile;
        dx.push_back(std::log(lam));
        dy.push_back(std::log(lam * lp_norm(prof, p)));
    }
    rep.discrete_subrange_slope = fit_slope(dx, dy);
    return rep;
}

SectorReport feedback_sup(const ExtendedSystem& sys, double alpha,
                          const std::vector<Complex>& samples) {
    SectorReport rep;
    rep.quantity = SectorQuantity::FeedbackSup;
    for (Complex lam : samples) {
        if (lam.real() <= alpha) continue;
        Complex kd;
        try {
            kd = transfer_value(sys, lam);
        } catch (const std::exception&) {
            ++rep.skipped;
            continue;
        }
        if (std::abs(1.0 - kd) <= 1e-12) {
            ++rep.skipped;  // singular feedback sample, recorded
            continue;
        }
        const double v = 1.0 / std::abs(1.0 - kd);
        rep.samples.push_back({lam, v});
        if (v > rep.sup) {
            rep.sup = v;
            rep.arg_sup = lam;
        }
    }
    return rep;
}

YosidaTermNorms yosida_term_norms(const ExtendedSystem& sys, double n, const TimeSignal& f,
                                  double p) {
    const Grid& grid = sys.grid;
    const GridFunction zero{grid, Vec::Zero(grid.num_nodes())};
    const TimeSignal v = mild_solution(sys.free_generator, f, zero);
    const TimeSignal z = mild_solution(sys.closed_loop_generator, f, zero);
    const DirichletMap dm = dirichlet_map(sys, Complex(n, 0.0));
    const Complex kd = sys.jump(dm.profile.values);
    if (std::abs(1.0 - kd) <= 1e-12)
        throw std::invalid_argument("feedback singular at n = " + std::to_string(n));
    const Complex gain = n * n / (1.0 - kd);

    const int m = f.tgrid.m;
    TimeSignal t1 = f, t2 = f, t3 = f, t4 = f, direct = f;
    for (int k = 0; k <= m; ++k) {
        const GridFunction vk{grid, v.frames.col(k)};
        const GridFunction wk{grid, z.frames.col(k) - v.frames.col(k)};
        const Vec rv = resolvent_apply(sys.free_generator, Complex(n, 0.0), vk).values;
        const Vec rw = resolvent_apply(sys.free_generator, Complex(n, 0.0), wk).values;
        t1.frames.col(k) = n * n * rv - n * vk.values;   // n A R(n,A) v, via A R = n R - I
        t3.frames.col(k) = n * n * rw - n * wk.values;
        t2.frames.col(k) = gain * sys.jump(rv) * dm.profile.values;
        t4.frames.col(k) = gain * sys.jump(rw) * dm.profile.values;
        const GridFunction zk{grid, z.frames.col(k)};
        const Vec rz = resolvent_apply(sys.closed_loop_generator, Complex(n, 0.0), zk).values;
        direct.frames.col(k) = n * n * rz - n * zk.values;
    }
    YosidaTermNorms out;
    out.term1 = bochner_norm(t1, p);
    out.term2 = bochner_norm(t2, p);
    out.term3 = bochner_norm(t3, p);
    out.term4 = bochner_norm(t4, p);
    out.direct = bochner_norm(direct, p);
    TimeSignal resid = f;
    resid.frames = t1.frames + t2.frames + t3.frames + t4.frames - direct.frames;
    out.residual = bochner_norm(resid, p);
    return out;
}

OperatorFamily weis_family(const LinearMap& map, double s_min, double s_max, int count) {
    OperatorFamily fam;
    fam.label = "imaginary-axis resolvents of " + map.tag;
    fam.grid = map.grid;
    fam.scaling_exponent = 1.0;
    for (int i = 0; i < count; ++i) {
        const double s = s_min * std::pow(s_max / s_min, double(i) / (count - 1));
        fam.parameters.push_back(s);
        fam.members.push_back(s * resolvent_matrix(map, Complex(0.0, s)));
    }
    return fam;
}

OperatorFamily dirichlet_family(const ExtendedSystem& sys, double omega, double p, double s_min,
                                double s_max, int count) {
    OperatorFamily fam;
    fam.label = "scaled boundary profiles";
    fam.grid = sys.grid;
    fam.scaling_exponent = 1.0 / p;
    for (int i = 0; i < count; ++i) {
        const double s = s_min * std::pow(s_max / s_min, double(i) / (count - 1));
        fam.parameters.push_back(s);
        fam.members.push_back(std::pow(s, 1.0 / p) *
                              dirichlet_map(sys, Complex(omega, s)).profile.values);
    }
    return fam;
}

OperatorFamily observation_family(const ExtendedSystem& sys, double omega, double p, double s_min,
                                  double s_max, int count) {
    if (!(p > 1.0)) throw std::invalid_argument("observation family requires p > 1");
    const double q = p / (p - 1.0);
    OperatorFamily fam;
    fam.label = "scaled boundary observations";
    fam.grid = sys.grid;
    fam.scaling_exponent = 1.0 / q;
    const int n = sys.grid.n;
    const LinearMap& A = sys.free_generator;
    const Vec jumpA = (sys.jump_row.weights.transpose() * *A.prolong).transpose().cast<Complex>();
    for (int i = 0; i < count; ++i) {
        const double s = s_min * std::pow(s_max / s_min, double(i) / (count - 1));
        fam.parameters.push_back(s);
        Mat M = -*A.reduced;
        for (int j = 0; j < n - 1; ++j) M(j, j) += Complex(omega, s);
        const Vec col = Eigen::PartialPivLU<Mat>(M.transpose()).solve(jumpA);
        Mat row = Mat::Zero(1, n + 1);
        row.block(0, 1, 1, n - 1) = std::pow(s, 1.0 / q) * col.transpose();
        fam.members.push_back(std::move(row));
    }
    return fam;
}

OperatorFamily dirichlet_family_real(const ExtendedSystem& sys, double s_min, double s_max,
                                     int count) {
    OperatorFamily fam;
    fam.label = "scaled boundary profiles (real axis)";
    fam.grid = sys.grid;
    fam.scaling_exponent = 0.5;
    for (int i = 0; i < count; ++i) {
        const double s = s_min * std::pow(s_max / s_min, double(i) / (count - 1));
        fam.parameters.push_back(s);
        fam.members.push_back(std::sqrt(s) *
                              dirichlet_map(sys, Complex(s + 1.0, 0.0)).profile.values);
    }
    return fam;
}

OperatorFamily observation_family_real(const ExtendedSystem& sys, double s_min, double s_max,
                                       int count) {
    OperatorFamily fam;
    fam.label = "scaled boundary observations (real axis)";
    fam.grid = sys.grid;
    fam.scaling_exponent = 0.5;
    const int n = sys.grid.n;
    const LinearMap& A = sys.free_generator;
    const Vec jumpA = (sys.jump_row.weights.transpose() * *A.prolong).transpose().cast<Complex>();
    for (int i = 0; i < count; ++i) {
        const double s = s_min * std::pow(s_max / s_min, double(i) / (count - 1));
        fam.parameters.push_back(s);
        Mat M = -*A.reduced;
        for (int j = 0; j < n - 1; ++j) M(j, j) += Complex(s + 1.0, 0.0);
        const Vec col = Eigen::PartialPivLU<Mat>(M.transpose()).solve(jumpA);
        Mat row = Mat::Zero(1, n + 1);
        row.block(0, 1, 1, n - 1) = std::sqrt(s) * col.transpose();
        fam.members.push_back(std::move(row));
    }
    return fam;
}

}  // namespace maxreglab
