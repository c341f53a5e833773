#include "parobst/obstacle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "level_system.hpp"

namespace parobst {

namespace {

// Longer cycles than the damped two-cycle occur at sign-changing interfaces;
// a node released this many times on one level stays pinned.
constexpr int kMaxReleases = 3;

int sign_of(double v, double tol) { return v > tol ? 1 : (v < -tol ? -1 : 0); }

std::vector<double> gather(const ScalarField& u, const detail::LevelSystem& sys, int level) {
    const std::size_t base = static_cast<std::size_t>(level) * u.grid().nodes_per_level();
    std::vector<double> v(sys.size());
    for (std::size_t b = 0; b < sys.size(); ++b) v[b] = u[base + sys.offset(b)];
    return v;
}

}  // namespace

double default_tol_zero(const SpaceTimeGrid& g) { return g.h() * g.h() / 10.0; }

ObstacleProblem problem_from_exact(const SpaceTimeGrid& g, const ExactProfile& e, const Cylinder& domain,
                                   double boundary_perturbation) {
    if (e.n != g.dim()) throw DomainError("exact profile dimension does not match the grid");
    ObstacleProblem p;
    p.domain = domain;
    p.f = ScalarField::sample(g, e.rhs);
    if (boundary_perturbation == 0.0) {
        p.boundary = ScalarField::sample(g, e.value);
    } else {
        p.boundary = ScalarField::sample(g, [v = e.value, eps = boundary_perturbation](const Point& x) {
            const double s = std::max(0.0, x.x[0]);
            return v(x) + eps * s * s * s;
        });
    }
    return p;
}

ObstacleSolution solve_no_sign(const ObstacleProblem& p) {
    const SpaceTimeGrid& g = p.boundary.grid();
    if (!(p.f.grid() == g)) throw DomainError("f lives on a different grid than the boundary data");
    const CylinderDomain dom = cylinder_domain(g, p.domain);
    for (auto idx : dom.bottom.indices())
        if (!std::isfinite(p.boundary[idx])) throw DomainError("boundary data missing on the bottom slice");
    for (auto idx : dom.lateral.indices())
        if (!std::isfinite(p.boundary[idx])) throw DomainError("boundary data missing on the lateral shell");
    for (auto idx : dom.interior.indices())
        if (!std::isfinite(p.f[idx])) throw DomainError("f not finite in the interior");

    const double tol = p.params.tol_zero < 0 ? default_tol_zero(g) : p.params.tol_zero;
    const int max_iter = p.params.max_iter > 0 ? p.params.max_iter : 4 * g.nx();

    auto sys = detail::LevelSystem::for_domain(g, dom);
    const std::size_t nb = sys.size();
    const std::size_t npl = g.nodes_per_level();
    const double D = sys.diag();
    const double ih2 = sys.inv_h2();
    const double ik = 1.0 / g.k();

    std::vector<double> out(g.size(), 0.0);
    std::vector<double> theta(g.size(), 0.0);
    std::vector<double> prev = gather(p.boundary, sys, dom.bottom_level);
    for (std::size_t b = 0; b < nb; ++b)
        out[static_cast<std::size_t>(dom.bottom_level) * npl + sys.offset(b)] = prev[b];

    // u = 0 nodes at the bottom start out pinned.
    std::vector<char> pinned(nb, 0);
    for (std::size_t b = 0; b < nb; ++b)
        if (!sys.on_shell(b) && std::abs(prev[b]) <= tol) pinned[b] = 1;

    ObstacleSolution sol;
    sol.converged = true;

    // H_h at a pinned node (u_b = 0): sum of neighbours / h^2 + prev / k.
    auto mu_at = [&](std::size_t b, const std::vector<double>& cur) {
        double s = 0;
        for (int j : sys.neighbours(b)) s += cur[static_cast<std::size_t>(j)];
        return s * ih2 + prev[b] * ik;
    };

    for (int l = dom.bottom_level + 1; l <= dom.top_level; ++l) {
        std::vector<double> cur = gather(p.boundary, sys, l);
        const std::vector<double> f = gather(p.f, sys, l);
        std::vector<int> phase(nb, 0);
        for (std::size_t b = 0; b < nb; ++b) phase[b] = sign_of(prev[b], tol);

        std::vector<char> before_last;   // pinned set two sweeps ago
        std::vector<char> damped(nb, 0);
        std::vector<int> releases(nb, 0);
        bool level_ok = false;
        int it = 0;
        for (; it < max_iter; ++it) {
            std::vector<double> src(nb);
            for (std::size_t b = 0; b < nb; ++b) {
                if (pinned[b]) cur[b] = 0.0;
                src[b] = damped[b] ? 0.5 * f[b] : f[b];
            }
            std::vector<char> fixed(nb);
            for (std::size_t b = 0; b < nb; ++b) fixed[b] = pinned[b] && !damped[b];
            sys.set_fixed(fixed);
            sys.step(cur, prev, src);
            const bool was_damped = std::any_of(damped.begin(), damped.end(), [](char c) { return c != 0; });
            std::fill(damped.begin(), damped.end(), 0);

            // Joins first: a free node whose sign flips is pinned.
            std::vector<char> next = pinned;
            for (std::size_t b = 0; b < nb; ++b) {
                if (sys.on_shell(b) || (pinned[b] && !was_damped)) continue;
                if (phase[b] == 0) phase[b] = sign_of(cur[b], tol);
                if (phase[b] != 0 && cur[b] * phase[b] < 0) next[b] = 1;
                else if (pinned[b]) next[b] = std::abs(cur[b]) <= tol ? 1 : 0;
            }
            // Releases: only nodes that stay free (or the shell) support a sign.
            if (!was_damped) {
                for (std::size_t b = 0; b < nb; ++b) {
                    if (sys.on_shell(b) || !pinned[b] || releases[b] >= kMaxReleases) continue;
                    // The sign of the value the node would take, up to roundoff; a
                    // tolerance here would leave H_h u outside [0, f] at pinned nodes.
                    const double mu = mu_at(b, cur);
                    const double trial = (mu - f[b]) / D;
                    const int s = sign_of(trial, 1e-12 * (std::abs(mu) + std::abs(f[b])) / D);
                    if (s == 0) continue;
                    bool support = sign_of(prev[b], tol) == s;
                    for (int j : sys.neighbours(b)) {
                        const auto ju = static_cast<std::size_t>(j);
                        if (!next[ju] && sign_of(cur[ju], tol) == s) support = true;
                    }
                    if (support) {
                        next[b] = 0;
                        phase[b] = s;
                        ++releases[b];
                    }
                }
            }
            if (next == pinned && !was_damped) {
                level_ok = true;
                ++it;
                break;
            }
            if (!was_damped && !before_last.empty() && next == before_last) {
                // Two-cycle: solve once with the disputed nodes free at half source.
                for (std::size_t b = 0; b < nb; ++b)
                    if (next[b] != pinned[b]) damped[b] = 1;
                ++sol.damped_levels;
                before_last.clear();
                pinned = next;
                for (std::size_t b = 0; b < nb; ++b)
                    if (damped[b]) pinned[b] = 1;
                continue;
            }
            before_last = pinned;
            pinned = std::move(next);
        }
        sol.iterations += it;
        sol.max_level_iterations = std::max(sol.max_level_iterations, it);
        if (!level_ok) {
            sol.converged = false;
            ++sol.unconverged_levels;
        }

        const std::size_t base = static_cast<std::size_t>(l) * npl;
        for (std::size_t b = 0; b < nb; ++b) {
            if (pinned[b]) cur[b] = 0.0;
            out[base + sys.offset(b)] = cur[b];
        }
        for (std::size_t b = 0; b < nb; ++b) {
            if (sys.on_shell(b)) continue;
            double th = 1.0, res;
            if (pinned[b]) {
                const double mu = mu_at(b, cur);
                th = f[b] != 0.0 ? std::clamp(mu / f[b], 0.0, 1.0) : 0.0;
                const double lo = std::min(0.0, f[b]), hi = std::max(0.0, f[b]);
                res = mu < lo ? lo - mu : (mu > hi ? mu - hi : 0.0);
            } else {
                res = std::abs(sys.heat(b, cur, prev) - f[b]);
            }
            theta[base + sys.offset(b)] = th;
            sol.residual = std::max(sol.residual, res);
        }
        prev = std::move(cur);
    }

    sol.u = ScalarField(g, std::move(out));
    sol.source_fraction = ScalarField(g, std::move(theta));
    sol.domain_interior = dom.interior;
    sol.coincidence = coincidence_set(sol.u, tol, dom.interior);
    return sol;
}

CoincidenceSet coincidence_set(const ScalarField& u, double tol_zero) {
    const SpaceTimeGrid& g = u.grid();
    std::vector<std::size_t> region;
    for (std::size_t idx = 0; idx < g.size(); ++idx)
        if (has_stencil(g, g.unflat(idx))) region.push_back(idx);
    return coincidence_set(u, tol_zero, NodeMask(std::move(region)));
}

CoincidenceSet coincidence_set(const ScalarField& u, double tol_zero, const NodeMask& region) {
    if (!(tol_zero >= 0)) throw DomainError("tol_zero must be non-negative");
    std::vector<std::size_t> idx;
    for (auto i : region.indices())
        if (std::abs(u[i]) <= tol_zero) idx.push_back(i);
    return {NodeMask(std::move(idx)), region, tol_zero};
}

FreeBoundary free_boundary(const SpaceTimeGrid& g, const CoincidenceSet& lambda) {
    const NodeMask& lam = lambda.mask;
    const NodeMask& reg = lambda.region;
    auto neighbours = [&](std::size_t idx, bool space, int dlevel) {
        std::vector<std::size_t> out;
        const NodeIndex a = g.unflat(idx);
        if (space) {
            for (int d = 0; d < g.dim(); ++d) {
                for (int s : {-1, 1}) {
                    NodeIndex c = a;
                    c.i[d] += s;
                    if (g.in_space(c.i)) out.push_back(g.flat(c));
                }
            }
        }
        if (dlevel != 0) {
            NodeIndex c = a;
            c.level += dlevel;
            if (c.level >= 0 && c.level < g.nt()) out.push_back(g.flat(c));
        }
        return out;
    };

    std::vector<std::size_t> interior;
    for (auto idx : lam.indices()) {
        bool ok = true;
        for (auto j : neighbours(idx, true, +1))
            if (reg.contains(j) && !lam.contains(j)) ok = false;
        if (ok) interior.push_back(idx);
    }
    const NodeMask inner(std::move(interior));

    std::vector<std::size_t> gamma;
    for (auto idx : lam.indices()) {
        if (inner.contains(idx)) continue;
        for (auto j : neighbours(idx, true, -1)) {
            if (inner.contains(j)) {
                gamma.push_back(idx);
                break;
            }
        }
    }
    return {NodeMask(std::move(gamma))};
}

std::optional<Point> nearest_free_boundary_point(const SpaceTimeGrid& g, const FreeBoundary& gamma,
                                                 const Point& near) {
    const int level = g.level_at(near.t);
    std::optional<Point> best;
    double bd = 0;
    for (auto idx : gamma.nodes.indices()) {
        const NodeIndex a = g.unflat(idx);
        if (a.level != level) continue;
        const Point p = g.point(a);
        double d = 0;
        for (int k = 0; k < g.dim(); ++k) d += (p.x[k] - near.x[k]) * (p.x[k] - near.x[k]);
        if (!best || d < bd) {
            best = p;
            bd = d;
        }
    }
    return best;
}

DiagnosticCurve density_curve(const SpaceTimeGrid& g, const CoincidenceSet& lambda, const Point& center,
                              const std::vector<double>& radii) {
    DiagnosticCurve c;
    c.name = "density";
    for (double r : radii) {
        const NodeMask m = cylinder_mask(g, Cylinder{center, r});
        if (m.empty()) throw DomainError("density_curve: empty cylinder mask");
        c.push(r, static_cast<double>(m.intersect(lambda.mask).count()) / static_cast<double>(m.count()));
    }
    return c;
}

DiagnosticCurve quadratic_growth_curve(const ScalarField& u, const Point& center, const std::vector<double>& radii) {
    DiagnosticCurve c;
    c.name = "growth";
    for (double r : radii) {
        const NodeMask m = cylinder_mask(u.grid(), Cylinder{center, r});
        c.push(r, sup_norm_on(u, m) / (r * r));
    }
    return c;
}

}  // namespace parobst
