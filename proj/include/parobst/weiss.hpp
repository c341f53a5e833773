#pragma once

#include <optional>
#include <string>
#include <vector>

#include "parobst/curve.hpp"
#include "parobst/exact.hpp"
#include "parobst/grid.hpp"

namespace parobst {

/// Time panels s in [r^2 gamma^{q+1}, r^2 gamma^q], q = 0..levels-1 (s = t0 - t),
/// each with a Gauss-Legendre rule of `order` points. Exact profiles use a
/// tensor Gauss-Hermite rule in space; sampled fields use piecewise-quadratic
/// interpolation on 2h blocks aligned to the center, integrated by composite
/// Gauss-Legendre and clipped at |x - x0| <= nu sqrt(2 s).
struct WeissQuadrature {
    double gamma = 0.5;
    int levels = 30;
    int order = 8;
    int hermite = 24;
    int space_order = 4;
    double nu = 8.0;
    /// Cutoff psi for sampled fields: 1 on B_{cutoff/2}(x0), 0 outside B_{3 cutoff/4}(x0).
    double cutoff = 1.0;
    /// Allowed estimate of the neglected s-tail relative to max(1, |W|).
    double tail_tol = 1e-8;

    void validate() const;
    friend bool operator==(const WeissQuadrature&, const WeissQuadrature&) = default;
};

/// Gauss rules on [-1,1] (Legendre) and on R with weight exp(-x^2) (Hermite).
struct GaussRule {
    std::vector<double> x, w;
};
GaussRule gauss_legendre(int order);
GaussRule gauss_hermite(int order);

/// 1 on [0,1/2], 0 on [3/4,inf), quintic smoothstep between (C2).
double cutoff_psi(double rho);
double cutoff_psi_derivative(double rho);

/// W(r; v, f, X0) = r^-4 int_{t0-r^2}^{t0} int (|grad v|^2 + 2 f v + v^2/(t - t0)) G(x - x0, t0 - t) dx dt
/// with unit-mass G. Exact route: the profile is evaluated directly, no cutoff.
double weiss_energy(const ExactProfile& v, const Point& center, double r, const WeissQuadrature& quad = {});
/// Sampled route: v and f interpolated from the grid and multiplied by psi.
double weiss_energy(const ScalarField& v, const ScalarField& f, const Point& center, double r,
                    const WeissQuadrature& quad = {});

/// Lv = (x - x0).grad v + 2 (t - t0) v_t - 2 v with centered gradient and backward v_t.
double euler_operator(const ScalarField& v, const NodeIndex& at, const Point& center = {});

struct WeissCurve {
    DiagnosticCurve curve;
    bool monotone = true;   // non-decreasing in r within tol_mono
    double worst_drop = 0;  // largest W(smaller r) - W(larger r)
};
inline constexpr double kMonotoneTol = 1e-3;
WeissCurve weiss_curve(const ScalarField& v, const ScalarField& f, const Point& center,
                       const std::vector<double>& radii, const WeissQuadrature& quad = {},
                       double tol_mono = kMonotoneTol);
WeissCurve weiss_curve(const ExactProfile& v, const Point& center, const std::vector<double>& radii,
                       const WeissQuadrature& quad = {}, double tol_mono = kMonotoneTol);

/// u_r(x,t) = u(x0 + r x, t0 + r^2 t) / r^power on the grid with spacings h/r, k/r^2
/// (node j maps to node j). Requires r/h and r^2/k to be integers.
ScalarField rescale(const ScalarField& u, double r, const Point& center, double power = 2.0);
/// Index-remapped mask on the rescaled grid.
NodeMask rescale_mask(const SpaceTimeGrid& g, const NodeMask& mask, double r, const Point& center);
/// Rescaled closed form (value / r^2, gradient / r, rhs unscaled).
ExactProfile rescale(const ExactProfile& v, double r, const Point& center);
/// Throws "radius not dyadic-compatible" unless r/h and (when `time` is set) r^2/k are integers.
void check_dyadic_compatible(const SpaceTimeGrid& g, double r, bool time = true);

enum class EnergyKind { Zero, Low, High, Indeterminate };
std::string to_string(EnergyKind k);

struct EnergyClass {
    EnergyKind kind = EnergyKind::Indeterminate;
    double w0 = 0;          // estimate of W(0+)
    double reference = 0;   // nearest reference value
    double distance = 0;    // |w0 - reference|
    std::string warning;
    DiagnosticCurve curve;
};

/// Reference energies from exact profiles: half-space and 1/2 x1^2.
double reference_energy_halfspace(int n, const WeissQuadrature& quad = {});
double reference_energy_polynomial(int n, const WeissQuadrature& quad = {});

/// Classifies by W(0+) (Aitken extrapolation of the three smallest reliable
/// radii, r >= 2h). Accepted when within 10% of the nearest reference.
EnergyClass classify_point(const ScalarField& u, const ScalarField& f, const Point& center,
                           const std::vector<double>& radii, const WeissQuadrature& quad = {});

/// Direction e_k = (cos th_k, sin th_k), th_k = 2 pi (k + phase) / K; n = 1 uses +-1.
std::vector<Vec> sample_directions(int n, int K, double phase);
int default_direction_count(int n);

struct BlowupDistance {
    double distance = 0;
    Vec direction{1.0, 0.0};
};
/// min over sampled e of sup over the unit cylinder of |u_r - 1/2 ((x.e)^+)^2|.
/// K = 0 uses the default count, phase < 0 the env seed.
BlowupDistance blowup_distance(const ScalarField& u, const Point& center, double r, int K = 0,
                               double phase = -1.0);

struct MinimalDiameter {
    double md = 0;
    double ratio = 0;   // md / r
    bool condition = false;
    std::size_t cloud = 0;
};
/// Smallest directional width of {|u| <= tol} on the slice t0 - r^2 inside B_r(x0).
MinimalDiameter minimal_diameter(const ScalarField& u, const Point& center, double r, double sigma,
                                 double tol_zero, int K = 0, double phase = -1.0);

}  // namespace parobst
