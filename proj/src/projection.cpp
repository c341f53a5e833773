#include "parobst/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace parobst {

double CaloricQuadratic::operator()(const Point& X, const Point& c) const {
    double s = 0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) s += (X.x[a] - c.x[a]) * M[a][b] * (X.x[b] - c.x[b]);
    return 0.5 * s + m * (X.t - c.t);
}

double CaloricQuadratic::norm() const {
    double s = m * m;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) s += M[a][b] * M[a][b];
    return std::sqrt(s);
}

double CaloricQuadratic::trace() const {
    double s = 0;
    for (int a = 0; a < n; ++a) s += M[a][a];
    return s;
}

CaloricQuadratic CaloricQuadratic::scaled(double s) const {
    CaloricQuadratic q = *this;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) q.M[a][b] *= s;
    q.m *= s;
    return q;
}

double CaloricQuadratic::sup_unit_cylinder() const {
    double lmin, lmax;
    if (n == 1) {
        lmin = lmax = M[0][0];
    } else {
        const double mid = 0.5 * (M[0][0] + M[1][1]);
        const double rad = std::hypot(0.5 * (M[0][0] - M[1][1]), M[0][1]);
        lmin = mid - rad;
        lmax = mid + rad;
    }
    // 1/2 x^T M x over |x| <= 1 and m t over -1 <= t <= 0 vary independently.
    const double hi = 0.5 * std::max(lmax, 0.0) + std::max(0.0, -m);
    const double lo = 0.5 * std::min(lmin, 0.0) + std::min(0.0, -m);
    return std::max(std::abs(hi), std::abs(lo));
}

namespace {

struct MeanBlock {
    Mat2 A{};
    double a = 0;
    std::size_t count = 0;
    double noise = 0;   // rounding floor of the difference quotients
};

MeanBlock mean_block(const ScalarField& u, const Cylinder& q) {
    const auto& g = u.grid();
    const NodeMask mask = cylinder_mask(g, q);
    if (mask.empty()) throw DomainError("projection over an empty cylinder mask");
    MeanBlock mb;
    double umax = 0;
    for (auto idx : mask.indices()) {
        umax = std::max(umax, std::abs(u[idx]));
        const TildeD2 d = tilde_d2(u, g.unflat(idx));
        for (int a = 0; a < g.dim(); ++a)
            for (int b = 0; b < g.dim(); ++b) mb.A[a][b] += d.hess[a][b];
        mb.a += d.dt;
    }
    mb.count = mask.count();
    mb.noise = 64 * std::numeric_limits<double>::epsilon() * umax * (4 * g.dim() / (g.h() * g.h()) + 2 / g.k());
    const double inv = 1.0 / static_cast<double>(mb.count);
    for (auto& row : mb.A)
        for (auto& v : row) v *= inv;
    mb.a *= inv;
    return mb;
}

}  // namespace

ProjectionResult project(const ScalarField& u, const Cylinder& q) {
    const int n = u.grid().dim();
    const MeanBlock mb = mean_block(u, q);
    double trA = 0;
    for (int a = 0; a < n; ++a) trA += mb.A[a][a];
    const double c = (trA - mb.a) / (n + 1);
    ProjectionResult r;
    r.Pi.n = n;
    r.Pi.M = mb.A;
    for (int a = 0; a < n; ++a) r.Pi.M[a][a] -= c;
    r.Pi.m = r.Pi.trace();
    r.S = r.Pi.norm();
    if (r.S <= mb.noise) {
        // D~2 u is rounding noise (u affine in x, constant in t)
        r.Pi = CaloricQuadratic{};
        r.Pi.n = n;
        r.S = 0;
    }
    if (r.S > 0) r.p_unit = r.Pi.scaled(1.0 / r.S);
    return r;
}

double QBlock::trace() const {
    double s = 0;
    for (int a = 0; a <= n; ++a) s += block[a][a];
    return s;
}

CaloricQuadratic QBlock::polynomial() const {
    CaloricQuadratic p;
    p.n = n;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) p.M[a][b] = block[a][b];
    p.m = -block[n][n];
    p.caloric = false;
    return p;
}

QBlock q_polynomial(const ScalarField& u, const Cylinder& q) {
    const int n = u.grid().dim();
    const MeanBlock mb = mean_block(u, q);
    QBlock b;
    b.n = n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) b.block[i][j] = mb.A[i][j];
    b.block[n][n] = -mb.a;
    double trA = 0;
    for (int a = 0; a < n; ++a) trA += mb.A[a][a];
    b.mean_heat = trA - mb.a;
    const double c = b.mean_heat / (n + 1);
    for (int a = 0; a <= n; ++a) b.block[a][a] -= c;
    return b;
}

double bmo_residual(const ScalarField& u, const Cylinder& q) {
    const auto& g = u.grid();
    const ProjectionResult pr = project(u, q);
    const NodeMask mask = cylinder_mask(g, q);
    double s = 0;
    for (auto idx : mask.indices()) {
        const TildeD2 d = tilde_d2(u, g.unflat(idx));
        for (int a = 0; a < g.dim(); ++a)
            for (int b = 0; b < g.dim(); ++b) {
                const double e = d.hess[a][b] - pr.Pi.M[a][b];
                s += e * e;
            }
        const double e = d.dt - pr.Pi.m;
        s += e * e;
    }
    return std::sqrt(s * cell_measure(g)) / std::pow(q.radius, 0.5 * (g.dim() + 2));
}

DiagnosticCurve s_curve(const ScalarField& u, const Point& center, const std::vector<double>& radii) {
    DiagnosticCurve c;
    c.name = "S";
    for (double r : radii) c.push(r, project(u, Cylinder{center, r}).S);
    return c;
}

PoincareResult poincare_residual(const ScalarField& w, const Cylinder& q) {
    const auto& g = w.grid();
    const Cylinder qk{q.center, kPoincareKappa * q.radius};
    const NodeMask inner = cylinder_mask(g, qk);
    const NodeMask outer = cylinder_mask(g, q);
    if (inner.empty()) throw DomainError("poincare_residual: empty inner cylinder");

    double wm = 0;
    std::array<double, kMaxDim> gm{0, 0};
    for (auto idx : inner.indices()) {
        const NodeIndex a = g.unflat(idx);
        wm += w[idx];
        const auto gr = gradient(w, a);
        for (int d = 0; d < g.dim(); ++d) gm[d] += gr[d];
    }
    const double inv = 1.0 / static_cast<double>(inner.count());
    wm *= inv;
    for (auto& v : gm) v *= inv;

    double l = 0;
    for (auto idx : inner.indices()) {
        const Point p = g.point(g.unflat(idx));
        double e = w[idx] - wm;
        for (int d = 0; d < g.dim(); ++d) e -= (p.x[d] - q.center.x[d]) * gm[d];
        l += e * e;
    }
    double d2 = 0, dt = 0;
    for (auto idx : outer.indices()) {
        const TildeD2 d = tilde_d2(w, g.unflat(idx));
        dt += d.dt * d.dt;
        d2 += d.norm_sq() - d.dt * d.dt;
    }
    const double cm = cell_measure(g);
    PoincareResult r;
    r.lhs = std::sqrt(l * cm);
    r.rhs = std::sqrt(d2 * cm) + std::sqrt(dt * cm);
    if (r.rhs == 0) {
        r.degenerate = true;
        r.ratio = 0;
    } else {
        r.ratio = r.lhs / r.rhs;
    }
    return r;
}

}  // namespace parobst
