#pragma once

#include <Eigen/Dense>
#include <complex>
#include <limits>

namespace maxreglab {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;
using RealVec = Eigen::VectorXd;
using RealMat = Eigen::MatrixXd;

/// Uniform nodes s_j = j/n on [0,1].
struct Grid {
    int n = 0;        // number of cells, >= 8
    double h = 0.0;   // spacing 1/n

    int num_nodes() const { return n + 1; }
    // j/n rounds once, so the endpoints land on 0 and 1 exactly
    double node(int j) const { return static_cast<double>(j) / n; }
    RealVec nodes() const;
};

/// Complex nodal values on a Grid (length n+1).
struct GridFunction {
    Grid grid;
    Vec values;
};

/// Uniform time nodes t_k = k*T/m on [0,T].
struct TimeGrid {
    double horizon = 0.0;  // T > 0
    int m = 0;             // steps, >= 8
    double dt = 0.0;       // T/m

    int num_nodes() const { return m + 1; }
    double node(int k) const { return static_cast<double>(k) * horizon / m; }
};

/// Time-sampled grid functions; column k is the frame at t_k.
struct TimeSignal {
    TimeGrid tgrid;
    Grid grid;
    Mat frames;  // (n+1) x (m+1)

    GridFunction frame(int k) const { return {grid, frames.col(k)}; }
};

Grid make_grid(int n);
TimeGrid make_time_grid(double horizon, int m);

/// Composite-trapezoid quadrature weights over all n+1 nodes (sum to 1 exactly).
RealVec trapezoid_weights(const Grid& grid);

GridFunction make_grid_function(const Grid& grid, const Vec& values);

/// Sample a scalar function of s onto the grid.
template <typename F>
GridFunction sample(const Grid& grid, F&& f) {
    Vec v(grid.num_nodes());
    for (int j = 0; j < grid.num_nodes(); ++j) v[j] = Complex(f(grid.node(j)));
    return {grid, std::move(v)};
}

template <typename F>
TimeSignal sample_signal(const Grid& grid, const TimeGrid& tg, F&& f) {
    Mat frames(grid.num_nodes(), tg.num_nodes());
    for (int k = 0; k < tg.num_nodes(); ++k)
        for (int j = 0; j < grid.num_nodes(); ++j)
            frames(j, k) = Complex(f(tg.node(k), grid.node(j)));
    return {tg, grid, std::move(frames)};
}

/// Trapezoid L^p norm of |g| on (0,1); p = infinity gives max-abs.
double lp_norm(const GridFunction& g, double p);
double lp_norm(const Grid& grid, const Vec& values, double p);

/// Trapezoid-in-time composition of frame L^p norms, power 1/p.
double bochner_norm(const TimeSignal& sig, double p);

/// Second-order time differentiation: central interior, one-sided at the endpoints.
TimeSignal time_derivative(const TimeSignal& sig);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

}  // namespace maxreglab
