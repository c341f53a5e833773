#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "parobst/curve.hpp"
#include "parobst/grid.hpp"
#include "parobst/obstacle.hpp"
#include "parobst/projection.hpp"

namespace parobst {

/// theta = clamp(H_h u / f, 0, 1) on Lambda and 1 elsewhere: the fraction of f
/// the discrete field actually carries.
ScalarField source_fraction(const ScalarField& u, const ScalarField& f, const NodeMask& lambda);

struct SplitResult {
    ScalarField u_r;      // rescaled field on the unit cylinder
    ScalarField f_r;
    ScalarField w_r;      // H w = f_r, w = u_r - Pi on the parabolic boundary
    ScalarField g_r;      // H g = -f_r (1 - theta_r), g = 0 on the parabolic boundary
    ScalarField pi_r;     // Pi sampled on the rescaled grid
    ProjectionResult projection;
    NodeMask domain;      // closed unit cylinder domain on the rescaled grid
    double residual = 0;  // sup |u_r - w_r - Pi - g_r| over the domain
};

/// Rescales u around X0 by r (no interpolation: r/h, r^2/k integers) and splits
/// u_r = w_r + Pi(u, r, X0) + g_r on the unit cylinder.
SplitResult split_w_g(const ScalarField& u, const ScalarField& f, const ScalarField& theta, double r,
                      const Point& center);

struct TelescopeResult {
    int levels = 0;
    std::vector<ScalarField> h;          // caloric pieces h_k on Q_{2^-k}
    std::vector<ScalarField> g_tilde;    // zero-boundary pieces on Q_{2^-j}
    std::vector<double> residual;        // sup |g - sum_{k<=j} h_k - g~_j| on Q_{2^-j}
    std::vector<double> projection_sup;  // sup_{Q_1} |Pi(g, 2^-j, X0)|
    std::vector<double> caloric_defect;  // sup |H h_k| over the interior of Q_{2^-k}
};

/// Dyadic telescope of g on Q_{2^-j}(X0), j = 0..J, with Q_1(X0) the outer cylinder.
TelescopeResult dyadic_telescope(const ScalarField& g, const Point& center, int J);

struct KeyInequalityReport {
    double S = 0;
    double lambda_r = 0, lambda_half = 0;
    double lhs = 0;          // ||D~2 (S p)|| on the audit set
    double w_norm = 0;       // ||D~2 w_r|| on the audit set
    double g_norm = 0;       // ||D~2 g_r|| on the audit set
    double ratio = 0;        // lhs / (w_norm + g_norm)
    bool holds = false;      // lhs <= (w_norm + g_norm)(1 + slack)
    bool vacuous = false;    // audit set empty
    std::size_t audit_nodes = 0;
    double split_residual = 0;
    /// ||D~2 g_r||_{L2(Q_1/2)} / (||f||_inf sqrt(|Lambda_r|)) and ||D~2 w_r||_{L^inf(Q_1/2)}.
    double g_scaling = 0;
    double w_sup_half = 0;
};

/// The triangle chain ||D~2(S p)|| <= ||D~2 w_r|| + ||D~2 g_r|| on the nodes of the
/// rescaled Lambda whose whole stencil lies in Lambda, intersected with Q_{1/2}.
/// `slack` is the relative allowance (e.g. 5 (h + k)).
KeyInequalityReport key_inequality_audit(const ScalarField& u, const ScalarField& f, const ScalarField& theta,
                                         const CoincidenceSet& lambda, double r, const Point& center,
                                         double slack);

/// flag_j = lambda_{j+1} <= lambda_j / 4 + h / r_{j+1} on consecutive dyadic radii.
std::vector<bool> decay_flags(const DiagnosticCurve& lambda, double h);

/// A Lambda mask with lambda_{2^-j} = 4^-j (to node rounding) around X0 for j = 1..J,
/// nodes drawn per dyadic shell in an order fixed by the seed. At j = 0 the whole
/// outer shell is taken, which is as close to 1 as nesting allows.
NodeMask geometric_lambda(const SpaceTimeGrid& g, const Point& center, int J, std::uint64_t seed);

}  // namespace parobst
