#pragma once

#include <optional>
#include <string>
#include <vector>

#include "parobst/curve.hpp"
#include "parobst/exact.hpp"
#include "parobst/grid.hpp"

namespace parobst {

struct ObstacleParams {
    double tol_zero = -1;     // negative: h^2 / 10
    int max_iter = 0;         // per time level; 0: 4 * nx

    friend bool operator==(const ObstacleParams&, const ObstacleParams&) = default;
};

/// H u = f chi_{u != 0} in the cylinder, u = g on its parabolic boundary.
struct ObstacleProblem {
    Cylinder domain;
    ScalarField f;
    ScalarField boundary;
    ObstacleParams params;
};

struct CoincidenceSet {
    NodeMask mask;
    NodeMask region;   // nodes where u was inspected
    double tol_zero = 0;
};

struct FreeBoundary {
    NodeMask nodes;
};

struct ObstacleSolution {
    ScalarField u;
    CoincidenceSet coincidence;
    /// Per node fraction theta of f actually applied: 1 on active nodes,
    /// H_h u / f (clamped to [0,1]) on pinned zero nodes, 0 elsewhere.
    ScalarField source_fraction;
    NodeMask domain_interior;
    int iterations = 0;          // total active-set sweeps over all levels
    int max_level_iterations = 0;
    bool converged = false;
    int damped_levels = 0;       // levels where a 2-cycle triggered the damped update
    int unconverged_levels = 0;
    /// max over interior nodes of |H_h u - f| (active) or dist(H_h u, [0,f]) (pinned).
    double residual = 0;
};

/// Active-set solve marching upward in time. At every level the nodes where
/// u = 0 are pinned; a pinned node is released when the value it would take
/// is non-zero and matches the sign of a non-zero neighbour, and an active
/// node is pinned when its value changes sign. The initial pinned set at each
/// level is the previous level's.
ObstacleSolution solve_no_sign(const ObstacleProblem& p);

/// Builds the problem data from a closed-form profile (f and g sampled from it).
ObstacleProblem problem_from_exact(const SpaceTimeGrid& g, const ExactProfile& e, const Cylinder& domain,
                                   double boundary_perturbation = 0.0);

/// {|u| <= tol_zero} over the region (default: every node with a full stencil).
CoincidenceSet coincidence_set(const ScalarField& u, double tol_zero);
CoincidenceSet coincidence_set(const ScalarField& u, double tol_zero, const NodeMask& region);

double default_tol_zero(const SpaceTimeGrid& g);

/// Nodes of the coincidence set that are not parabolically interior to it and
/// touch its parabolic interior. A Lambda node is interior when its spatial
/// neighbours and its successor in time are all in Lambda (neighbours outside
/// the inspected region are ignored); a boundary node must have an interior
/// node among its spatial neighbours or its predecessor in time.
FreeBoundary free_boundary(const SpaceTimeGrid& g, const CoincidenceSet& lambda);

/// Free boundary node on the time level of `near` closest to it in space (ties:
/// lowest flat index); empty when that level has no free boundary node.
std::optional<Point> nearest_free_boundary_point(const SpaceTimeGrid& g, const FreeBoundary& gamma,
                                                 const Point& near);

/// lambda_r = |Lambda cap Q_r| / |Q_r| in node counts.
DiagnosticCurve density_curve(const SpaceTimeGrid& g, const CoincidenceSet& lambda, const Point& center,
                              const std::vector<double>& radii);

/// M_r = sup_{Q_r} |u| / r^2.
DiagnosticCurve quadratic_growth_curve(const ScalarField& u, const Point& center,
                                       const std::vector<double>& radii);

}  // namespace parobst
