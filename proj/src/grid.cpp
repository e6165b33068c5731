#include "maxreglab/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace maxreglab {

RealVec Grid::nodes() const {
    RealVec s(n + 1);
    for (int j = 0; j <= n; ++j) s[j] = node(j);
    return s;
}

Grid make_grid(int n) {
    if (n < 8) throw std::invalid_argument("grid too coarse: n must be >= 8");
    return Grid{n, 1.0 / n};
}

TimeGrid make_time_grid(double horizon, int m) {
    if (!(horizon > 0.0)) throw std::invalid_argument("time horizon must be positive");
    if (m < 8) throw std::invalid_argument("time grid too coarse: m must be >= 8");
    return TimeGrid{horizon, m, horizon / m};
}

RealVec trapezoid_weights(const Grid& grid) {
    RealVec w = RealVec::Constant(grid.num_nodes(), grid.h);
    w[0] *= 0.5;
    w[grid.n] *= 0.5;
    return w;
}

GridFunction make_grid_function(const Grid& grid, const Vec& values) {
    if (values.size() != grid.num_nodes())
        throw std::invalid_argument("grid function length must be n+1");
    if (!values.allFinite()) throw std::invalid_argument("grid function has non-finite entries");
    return {grid, values};
}

double lp_norm(const Grid& grid, const Vec& values, double p) {
    if (p == kInfinity) return values.cwiseAbs().maxCoeff();
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm requires p >= 1 or p = infinity");
    const RealVec w = trapezoid_weights(grid);
    double acc = 0.0;
    for (int j = 0; j < values.size(); ++j) acc += w[j] * std::pow(std::abs(values[j]), p);
    return std::pow(acc, 1.0 / p);
}

double lp_norm(const GridFunction& g, double p) { return lp_norm(g.grid, g.values, p); }

double bochner_norm(const TimeSignal& sig, double p) {
    if (!(p >= 1.0) || p == kInfinity)
        throw std::invalid_argument("bochner_norm requires finite p >= 1");
    const int m = sig.tgrid.m;
    const double dt = sig.tgrid.dt;
    double acc = 0.0;
    for (int k = 0; k <= m; ++k) {
        const double wk = (k == 0 || k == m) ? 0.5 * dt : dt;
        acc += wk * std::pow(lp_norm(sig.grid, sig.frames.col(k), p), p);
    }
    return std::pow(acc, 1.0 / p);
}

TimeSignal time_derivative(const TimeSignal& sig) {
    const int m = sig.tgrid.m;
    if (m < 2) throw std::invalid_argument("time_derivative needs m >= 2");
    const double dt = sig.tgrid.dt;
    Mat d(sig.frames.rows(), sig.frames.cols());
    d.col(0) = (-3.0 * sig.frames.col(0) + 4.0 * sig.frames.col(1) - sig.frames.col(2)) / (2.0 * dt);
    for (int k = 1; k < m; ++k)
        d.col(k) = (sig.frames.col(k + 1) - sig.frames.col(k - 1)) / (2.0 * dt);
    d.col(m) = (3.0 * sig.frames.col(m) - 4.0 * sig.frames.col(m - 1) + sig.frames.col(m - 2)) / (2.0 * dt);
    return {sig.tgrid, sig.grid, std::move(d)};
}

}  // namespace maxreglab
