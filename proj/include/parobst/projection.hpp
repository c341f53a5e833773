#pragma once

#include <array>
#include <optional>
#include <vector>

#include "parobst/curve.hpp"
#include "parobst/grid.hpp"

namespace parobst {

using Mat2 = std::array<std::array<double, kMaxDim>, kMaxDim>;

/// p(x,t) = 1/2 x^T M x + m t (x measured from a center). Members of the caloric
/// space have m = tr M; `caloric` is false for the relaxed q-polynomials.
struct CaloricQuadratic {
    int n = 1;
    Mat2 M{};
    double m = 0;
    bool caloric = true;

    double operator()(const Point& X, const Point& center = {}) const;
    /// sqrt(sum M_ij^2 + m^2): the (constant) |D~2 p|.
    double norm() const;
    double trace() const;
    CaloricQuadratic scaled(double s) const;
    /// sup over the unit cylinder |x| <= 1, -1 < t <= 0 of |p|, in closed form.
    double sup_unit_cylinder() const;
};

struct ProjectionResult {
    CaloricQuadratic Pi;
    double S = 0;
    std::optional<CaloricQuadratic> p_unit;   // absent when S = 0
};

/// Projection onto the caloric space in the D~2 least-squares sense over Q.
/// With A = mean D2 u and a = mean u_t:  M = A - ((tr A - a)/(n+1)) I, m = tr M.
ProjectionResult project(const ScalarField& u, const Cylinder& q);

/// Mean parabolic Hessian block diag(D2 u, -u_t) with its trace removed:
/// block - (mean Hu / (n+1)) I. The trace-free block defines a caloric polynomial
/// q = 1/2 x^T B x - t B_{n+1,n+1}.
struct QBlock {
    int n = 1;
    std::array<std::array<double, kMaxDim + 1>, kMaxDim + 1> block{};
    double mean_heat = 0;
    double trace() const;
    CaloricQuadratic polynomial() const;
};
QBlock q_polynomial(const ScalarField& u, const Cylinder& q);

/// || D~2 u - D~2 Pi ||_{L2(Q_r)} / r^{(n+2)/2}.
double bmo_residual(const ScalarField& u, const Cylinder& q);

/// S(u, r, X0) over the given radii.
DiagnosticCurve s_curve(const ScalarField& u, const Point& center, const std::vector<double>& radii);

struct PoincareResult {
    double lhs = 0;
    double rhs = 0;
    double ratio = 0;
    bool degenerate = false;   // rhs == 0
};
inline constexpr double kPoincareKappa = 7.0 / 8.0;
/// || w - (w)_{Q_k} - (x - x0).(grad w)_{Q_k} ||_{L2(Q_k)} against ||D2 w|| + ||w_t|| on Q,
/// with Q_k the cylinder of radius kappa r.
PoincareResult poincare_residual(const ScalarField& w, const Cylinder& q);

}  // namespace parobst
