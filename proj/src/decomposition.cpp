#include "parobst/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "parobst/heat_solver.hpp"
#include "parobst/weiss.hpp"

namespace parobst {

ScalarField source_fraction(const ScalarField& u, const ScalarField& f, const NodeMask& lambda) {
    const SpaceTimeGrid& g = u.grid();
    if (!(f.grid() == g)) throw DomainError("source_fraction: f lives on a different grid");
    std::vector<double> th(g.size(), 1.0);
    for (auto idx : lambda.indices()) {
        const NodeIndex a = g.unflat(idx);
        if (!has_stencil(g, a) || f[idx] == 0.0) continue;
        th[idx] = std::clamp(heat_operator(u, a) / f[idx], 0.0, 1.0);
    }
    return ScalarField(g, std::move(th));
}

SplitResult split_w_g(const ScalarField& u, const ScalarField& f, const ScalarField& theta, double r,
                      const Point& center) {
    if (!(f.grid() == u.grid()) || !(theta.grid() == u.grid()))
        throw DomainError("split_w_g: u, f and theta must share a grid");
    SplitResult s;
    s.projection = project(u, Cylinder{center, r});
    s.u_r = rescale(u, r, center);
    s.f_r = rescale(f, r, center, 0.0);
    const ScalarField th = rescale(theta, r, center, 0.0);
    const SpaceTimeGrid& g = s.u_r.grid();
    const Cylinder q1{Point{}, 1.0};
    const CaloricQuadratic pi = s.projection.Pi;
    s.pi_r = ScalarField::sample(g, [pi](const Point& p) { return pi(p); });

    s.w_r = solve_dirichlet({q1, s.f_r, s.u_r.axpby(1.0, s.pi_r, -1.0)});
    std::vector<double> src(g.size());
    for (std::size_t i = 0; i < src.size(); ++i) src[i] = -s.f_r[i] * (1.0 - th[i]);
    s.g_r = solve_dirichlet({q1, ScalarField(g, std::move(src)), ScalarField::zeros(g)});

    s.domain = cylinder_domain(g, q1).all;
    for (auto idx : s.domain.indices())
        s.residual = std::max(s.residual, std::abs(s.u_r[idx] - s.w_r[idx] - s.pi_r[idx] - s.g_r[idx]));
    return s;
}

TelescopeResult dyadic_telescope(const ScalarField& g, const Point& center, int J) {
    const SpaceTimeGrid& grid = g.grid();
    if (J < 0) throw DomainError("dyadic_telescope: J must be non-negative");
    if (std::ldexp(1.0, -J) < 4 * grid.h() * (1 - 1e-12)) {
        std::ostringstream os;
        os << "dyadic_telescope: J = " << J << " too deep for h = " << grid.h()
           << " (innermost cylinder needs at least 4 nodes per radius)";
        throw DomainError(os.str());
    }
    check_fits(grid, Cylinder{center, 1.0});

    std::vector<double> hg(grid.size(), 0.0);
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        const NodeIndex a = grid.unflat(idx);
        if (has_stencil(grid, a)) hg[idx] = heat_operator(g, a);
    }
    const ScalarField src(grid, std::move(hg));

    TelescopeResult t;
    t.levels = J;
    std::vector<double> sum(grid.size(), 0.0);
    ScalarField prev = g;
    for (int j = 0; j <= J; ++j) {
        const Cylinder q{center, std::ldexp(1.0, -j)};
        ScalarField hj = caloric_extension(prev, q);
        ScalarField gj = solve_dirichlet({q, src, ScalarField::zeros(grid)});
        const CylinderDomain dom = cylinder_domain(grid, q);
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += hj[i];
        double res = 0, defect = 0;
        for (auto idx : dom.all.indices()) res = std::max(res, std::abs(g[idx] - sum[idx] - gj[idx]));
        for (auto idx : dom.interior.indices()) defect = std::max(defect, std::abs(heat_operator(hj, grid.unflat(idx))));
        t.residual.push_back(res);
        t.caloric_defect.push_back(defect);
        t.projection_sup.push_back(project(g, q).Pi.sup_unit_cylinder());
        t.h.push_back(std::move(hj));
        prev = gj;
        t.g_tilde.push_back(std::move(gj));
    }
    return t;
}

namespace {

// Lambda nodes whose whole difference stencil (3^n spatial block and the
// previous level) lies in Lambda.
std::vector<std::size_t> stencil_interior(const SpaceTimeGrid& g, const NodeMask& lam, const NodeMask& within) {
    std::vector<std::size_t> out;
    const int n = g.dim();
    for (auto idx : within.indices()) {
        if (!lam.contains(idx)) continue;
        const NodeIndex a = g.unflat(idx);
        if (!has_stencil(g, a)) continue;
        bool ok = true;
        NodeIndex p = a;
        p.level -= 1;
        if (!lam.contains(g.flat(p))) ok = false;
        for (int dy = (n == 2 ? -1 : 0); dy <= (n == 2 ? 1 : 0) && ok; ++dy) {
            for (int dx = -1; dx <= 1 && ok; ++dx) {
                NodeIndex b = a;
                b.i[0] += dx;
                b.i[1] += dy;
                if (!lam.contains(g.flat(b))) ok = false;
            }
        }
        if (ok) out.push_back(idx);
    }
    return out;
}

}  // namespace

KeyInequalityReport key_inequality_audit(const ScalarField& u, const ScalarField& f, const ScalarField& theta,
                                         const CoincidenceSet& lambda, double r, const Point& center,
                                         double slack) {
    KeyInequalityReport k;
    const SpaceTimeGrid& g0 = u.grid();
    const NodeMask qr = cylinder_mask(g0, Cylinder{center, r});
    const NodeMask qh = cylinder_mask(g0, Cylinder{center, r / 2});
    k.lambda_r = static_cast<double>(qr.intersect(lambda.mask).count()) / static_cast<double>(qr.count());
    k.lambda_half = static_cast<double>(qh.intersect(lambda.mask).count()) / static_cast<double>(qh.count());

    const SplitResult s = split_w_g(u, f, theta, r, center);
    k.S = s.projection.S;
    k.split_residual = s.residual;
    const SpaceTimeGrid& g = s.u_r.grid();
    const NodeMask lam_r = rescale_mask(g0, lambda.mask, r, center);
    const NodeMask half = cylinder_mask(g, Cylinder{Point{}, 0.5});
    const NodeMask audit(stencil_interior(g, lam_r, half));
    k.audit_nodes = audit.count();

    const double cm = cell_measure(g);
    const NodeMask unit = cylinder_mask(g, Cylinder{Point{}, 1.0});
    double fsup = 0;
    for (auto idx : unit.indices()) fsup = std::max(fsup, std::abs(s.f_r[idx]));
    const std::size_t lam_count = unit.intersect(lam_r).count();
    const double g_half = tilde_d2_l2(s.g_r, half);
    if (fsup > 0 && lam_count > 0) k.g_scaling = g_half / (fsup * std::sqrt(static_cast<double>(lam_count) * cm));
    k.w_sup_half = tilde_d2_sup(s.w_r, half);

    if (audit.empty()) {
        k.vacuous = true;
        k.holds = true;
        return k;
    }
    k.lhs = k.S * std::sqrt(static_cast<double>(audit.count()) * cm);
    k.w_norm = tilde_d2_l2(s.w_r, audit);
    k.g_norm = tilde_d2_l2(s.g_r, audit);
    const double rhs = k.w_norm + k.g_norm;
    k.ratio = rhs > 0 ? k.lhs / rhs : (k.lhs > 0 ? INFINITY : 0.0);
    k.holds = k.lhs <= rhs * (1 + slack);
    return k;
}

std::vector<bool> decay_flags(const DiagnosticCurve& lambda, double h) {
    std::vector<bool> flags;
    for (std::size_t j = 0; j + 1 < lambda.size(); ++j) {
        const double r0 = lambda.radii[j], r1 = lambda.radii[j + 1];
        if (std::abs(r1 - 0.5 * r0) > 1e-12 * r0) throw DomainError("decay_flags: radii are not consecutive dyadic");
        flags.push_back(lambda.values[j + 1] <= 0.25 * lambda.values[j] + h / r1);
    }
    return flags;
}

NodeMask geometric_lambda(const SpaceTimeGrid& g, const Point& center, int J, std::uint64_t seed) {
    if (J < 0) throw DomainError("geometric_lambda: J must be non-negative");
    std::vector<NodeMask> m;
    for (int j = 0; j <= J; ++j) m.push_back(cylinder_mask(g, Cylinder{center, std::ldexp(1.0, -j)}));
    std::vector<std::size_t> target(static_cast<std::size_t>(J) + 1);
    for (int j = 0; j <= J; ++j) {
        const auto sz = static_cast<double>(m[static_cast<std::size_t>(j)].count());
        target[static_cast<std::size_t>(j)] = static_cast<std::size_t>(std::llround(std::ldexp(sz, -2 * j)));
    }
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> chosen;
    auto pick = [&](std::vector<std::size_t> pool, std::size_t count) {
        std::vector<std::pair<std::uint64_t, std::size_t>> keyed;
        for (auto idx : pool) keyed.emplace_back(rng(), idx);
        std::sort(keyed.begin(), keyed.end());
        count = std::min(count, keyed.size());
        for (std::size_t i = 0; i < count; ++i) chosen.push_back(keyed[i].second);
    };
    const auto last = static_cast<std::size_t>(J);
    pick(std::vector<std::size_t>(m[last].indices().begin(), m[last].indices().end()), target[last]);
    for (int j = J - 1; j >= 0; --j) {
        const auto ju = static_cast<std::size_t>(j);
        std::vector<std::size_t> shell;
        for (auto idx : m[ju].indices())
            if (!m[ju + 1].contains(idx)) shell.push_back(idx);
        const std::size_t need = target[ju] > target[ju + 1] ? target[ju] - target[ju + 1] : 0;
        pick(std::move(shell), need);
    }
    return NodeMask(std::move(chosen));
}

}  // namespace parobst
