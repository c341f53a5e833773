#pragma once

#include "parobst/grid.hpp"

namespace parobst {

/// H w = rhs in the cylinder, w = boundary on its parabolic boundary.
/// Only the lateral-shell and bottom-slice values of `boundary` are read.
struct DirichletProblem {
    Cylinder domain;
    ScalarField rhs;
    ScalarField boundary;
};

/// Backward Euler in time, (2n+1)-point Laplacian in space. The result equals
/// the boundary data on the parabolic boundary and is zero off the closed domain.
ScalarField solve_dirichlet(const DirichletProblem& p);

/// solve_dirichlet with zero right-hand side.
ScalarField caloric_extension(const ScalarField& boundary, const Cylinder& domain);

/// Discrete Duhamel sum g(x,t) = sum_{s<t} sum_y G(x-y, t-s) source(y,s) h^n k
/// over the whole grid. With H = Laplacian - d/dt this gives H g = -source
/// (the forward heat equation g_t - Laplacian g = source).
ScalarField kernel_convolution(const ScalarField& source);

/// Measured interior-derivative constant
///   ||D~2 w||_{L^inf(Q_{r/2})} r^2 / ||w||_{L^1(Q_r)}
/// for a caloric w. Throws when w is not caloric to `caloric_tol`
/// (relative to max |D~2 w|) or when ||w||_{L^1} = 0.
double interior_derivative_ratio(const ScalarField& w, const Cylinder& q, double caloric_tol = 0.05);

/// L2 norm of |D~2 u| over the mask.
double tilde_d2_l2(const ScalarField& u, const NodeMask& mask);
/// Sup of |D~2 u| over the mask.
double tilde_d2_sup(const ScalarField& u, const NodeMask& mask);

/// Zero-boundary estimate ratios for a solve on Q_r with right-hand side f.
struct ZeroBoundaryRatio {
    double literal = 0;        // ||D~2 w|| / (r^{(n+2)/2} ||f||)
    double scale_free = 0;     // ||D~2 w|| / ||f||
};
ZeroBoundaryRatio zero_boundary_ratio(const ScalarField& w, const ScalarField& f, const Cylinder& q);

}  // namespace parobst
