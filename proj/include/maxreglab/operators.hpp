#pragma once

#include "maxreglab/grid.hpp"

#include <optional>
#include <string>
#include <vector>

namespace maxreglab {

/// Nodal functional value(g) = sum_j weights_j * g(s_j).
struct BoundaryFunctional {
    RealVec weights;

    Complex value(const Vec& g) const { return weights.transpose().cast<Complex>() * g; }
    Complex value(const GridFunction& g) const { return value(g.values); }
};

enum class BoundaryCondition { Free, ClosedLoop };

/// Dense operator on grid functions. Generator-type maps additionally carry the
/// boundary-eliminated interior block (`reduced`) and the slaving map `prolong`
/// that reconstructs endpoint values from the boundary equations; spectra,
/// resolvents, and exponentials of generators are taken on the reduced block.
struct LinearMap {
    Grid grid;
    Mat full;  // (n+1) x (n+1)
    std::optional<Mat> reduced;       // (n-1) x (n-1)
    std::optional<RealMat> prolong;   // (n+1) x (n-1)
    std::optional<Vec> eigenvalues;   // cached spectrum of the reduced/full block
    std::string tag;

    int dim() const { return static_cast<int>(full.rows()); }
    GridFunction apply(const GridFunction& g) const;
    Vec apply(const Vec& g) const;
};

/// Interior second-difference rows plus one boundary functional per endpoint.
/// Row conventions (all second-order):
///   left:  g'(0)  ~ (-3 g_0 + 4 g_1 - g_2) / (2h)       (homogeneous Neumann)
///   right: g'(1)  ~ (g_{n-2} - 4 g_{n-1} + 3 g_n) / (2h)  (the flux functional)
///   jump:  g(1) - g(0)                                    (the feedback functional)
struct ExtendedSystem {
    Grid grid;
    int boundary_dim = 1;  // dimension of the boundary data space
    BoundaryFunctional left_neumann;
    BoundaryFunctional flux_row;   // right-endpoint flux, the controlled boundary row
    BoundaryFunctional jump_row;   // endpoint jump, the feedback read-out
    RealMat interior;              // (n-1) x (n+1) stencil rows for nodes 1..n-1

    LinearMap free_generator;         // flux_row = 0
    LinearMap closed_loop_generator;  // flux_row = jump_row

    const LinearMap& generator(BoundaryCondition bc) const {
        return bc == BoundaryCondition::Free ? free_generator : closed_loop_generator;
    }
    Complex jump(const Vec& g) const { return jump_row.value(g); }

    /// Same stencils with the feedback functional zeroed (closed loop == free).
    ExtendedSystem with_zero_jump() const;
};

ExtendedSystem assemble_extended(const Grid& grid);

LinearMap generator_matrix(const ExtendedSystem& sys, BoundaryCondition bc);

/// Solution of the boundary-value problem (lambda - A_m) g = 0 interior,
/// g'(0) = 0, flux(g) = 1, for a unit boundary datum.
struct DirichletMap {
    Complex lambda;
    GridFunction profile;
    std::string warning;  // set when lambda is close to the free spectrum
};

DirichletMap dirichlet_map(const ExtendedSystem& sys, Complex lambda);

/// cosh(sqrt(lambda) s)/(sqrt(lambda) sinh sqrt(lambda)); overflow-safe for large Re lambda.
Complex dirichlet_closed_form(Complex lambda, double s);

/// Exact L^2(0,1) norm of the closed-form profile (real lambda > 0).
double dirichlet_closed_form_norm2(double lambda);
/// L^p(0,1) norm of the closed-form profile by layer-adapted quadrature (real lambda > 0).
double dirichlet_closed_form_norm(double lambda, double p);

GridFunction resolvent_apply(const LinearMap& map, Complex lambda, const GridFunction& f);

/// Full (n+1)^2 matrix of the discrete resolvent (boundary columns are zero for
/// generator maps: the solve reads interior data only).
Mat resolvent_matrix(const LinearMap& map, Complex lambda);

struct ResolventIdentityReport {
    double factored_form = 0.0;  // vs (I - D_lambda K)^{-1} R(lambda, A)
    double additive_form = 0.0;  // vs R(lambda,A) + D_lambda (1 - K D_lambda)^{-1} K R(lambda,A)
    double worst() const { return factored_form > additive_form ? factored_form : additive_form; }
};

ResolventIdentityReport resolvent_identity_residual(const ExtendedSystem& sys, Complex lambda);

/// || D_lambda - (I - (lambda-mu) R(lambda,A)) D_mu || in the grid L^2 norm.
double greiner_residual(const ExtendedSystem& sys, Complex lambda, Complex mu);

/// Boundary-to-boundary response jump(D_lambda).
Complex transfer_value(const ExtendedSystem& sys, Complex lambda);

/// (Pg)(s) = b(s) g'(s) + c(s) g(s) with second-order stencils at every node.
LinearMap perturbation_matrix(const Grid& grid, const GridFunction& b, const GridFunction& c);

/// All eigenvalues, sorted by real part descending (reduced block for generators).
std::vector<Complex> spectrum(const LinearMap& map);

double spectral_abscissa(const LinearMap& map);

/// Generator plus an interior perturbation sharing the generator's domain.
LinearMap add_perturbation(const LinearMap& gen, const LinearMap& P);

/// map - omega * I (shift applied to the reduced block when present).
LinearMap shifted(const LinearMap& map, double omega);

// --- weighted operator norms -------------------------------------------------

/// Quadrature weights on the interior nodes 1..n-1 with the eliminated endpoint
/// mass lumped onto the neighbors: h * [3/2, 1, ..., 1, 3/2]. The eliminated
/// free stencil is exactly self-adjoint in this inner product.
RealVec lumped_interior_weights(const Grid& grid);

/// Largest singular value of diag(sqrt(w_out)) M diag(1/sqrt(w_in)) by power
/// iteration on the normal operator; deterministic start.
double weighted_opnorm(const Mat& M, const RealVec& w_out, const RealVec& w_in,
                       double tol = 1e-10, int max_iter = 2000);

/// Operator norm of an interior-block matrix in the lumped inner product.
double reduced_opnorm(const Mat& M, const Grid& grid);

/// Operator norm of a full-grid matrix in the trapezoid inner product.
double full_opnorm(const Mat& M, const Grid& grid);

// --- derivative stencils (second-order, one-sided at the ends) ---------------

RealMat first_derivative_matrix(const Grid& grid);
RealMat second_derivative_matrix(const Grid& grid);

}  // namespace maxreglab
