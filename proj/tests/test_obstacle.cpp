#include <doctest.h>

#include <cmath>

#include "parobst/heat_solver.hpp"
#include "parobst/obstacle.hpp"

using namespace parobst;

namespace {

double sup_error(const ObstacleSolution& s, const ExactProfile& e) {
    const SpaceTimeGrid& g = s.u.grid();
    double err = 0;
    for (auto i : s.domain_interior.indices()) err = std::max(err, std::abs(s.u[i] - e.value(g.point(g.unflat(i)))));
    return err;
}

ObstacleSolution solve(const SpaceTimeGrid& g, const ExactProfile& e, double eps = 0) {
    return solve_no_sign(problem_from_exact(g, e, Cylinder{Point{}, 1.0}, eps));
}

}  // namespace

TEST_CASE("half-space profile recovered") {
    const SpaceTimeGrid g = make_grid(1, 1.25, 1.0 / 32, 1.25, 1.0 / 256);
    const ObstacleSolution s = solve(g, halfspace(1));
    CHECK(s.converged);
    CHECK(sup_error(s, halfspace(1)) < 1e-12);
    CHECK(s.residual < 1e-10);
    // Lambda = {x <= 0} on the inspected region
    for (auto idx : s.coincidence.region.indices()) {
        const Point p = g.point(g.unflat(idx));
        CHECK(s.coincidence.mask.contains(idx) == (p.x[0] <= 1e-12));
    }
}

TEST_CASE("off-node half-space converges at second order") {
    std::vector<double> err;
    for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
        const SpaceTimeGrid g = make_grid(1, 1.25, h, 1.25, h);
        const ExactProfile e = halfspace(1, {1, 0}, 1.0 / 3);
        const ObstacleSolution s = solve(g, e);
        CHECK(s.converged);
        err.push_back(sup_error(s, e));
    }
    CHECK(0.5 * std::log2(err[0] / err[2]) >= 1.9);
}

TEST_CASE("pure polynomial: no coincidence set beyond the null line") {
    std::array<std::array<double, kMaxDim>, kMaxDim> M{};
    M[0][0] = 1;
    const SpaceTimeGrid g = make_grid(1, 1.25, 1.0 / 32, 1.25, 1.0 / 256);
    const ObstacleSolution s = solve(g, polynomial(1, M, 1.0));
    CHECK(s.converged);
    CHECK(sup_error(s, polynomial(1, M, 1.0)) < 1e-12);
    // only the x = 0 column vanishes
    for (auto idx : s.coincidence.mask.indices()) CHECK(std::abs(g.point(g.unflat(idx)).x[0]) < 0.1);
    CHECK(free_boundary(g, s.coincidence).nodes.empty());
}

TEST_CASE("time barrier: Lambda below the slice, error O(h^2 + k)") {
    const double h = 1.0 / 32;
    const SpaceTimeGrid g = make_grid(1, 1.25, h, 1.25, h);
    const ExactProfile e = time_barrier(1, -0.5, 1.0);   // (t + 1/2)^+, f = -1
    const ObstacleSolution s = solve(g, e);
    CHECK(s.converged);
    CHECK(sup_error(s, e) <= h * h + g.k());
    const FreeBoundary fb = free_boundary(g, s.coincidence);
    CHECK(!fb.nodes.empty());
    for (auto idx : fb.nodes.indices()) CHECK(g.point(g.unflat(idx)).t == doctest::Approx(-0.5));
    const CoincidenceSet& lam = s.coincidence;
    for (auto idx : lam.region.indices()) {
        const Point p = g.point(g.unflat(idx));
        CHECK(lam.mask.contains(idx) == (p.t <= -0.5 + 1e-12));
    }
    // the cylinder of radius 1/4 at the origin sits above the interface
    CHECK(density_curve(g, lam, Point{}, {0.25}).values[0] == 0.0);
}

TEST_CASE("self-consistency and Lambda-vanishing on a perturbed 1D scenario") {
    const SpaceTimeGrid g = make_grid(1, 1.25, 1.0 / 64, 1.25, 4.0 / 4096);
    const ObstacleProblem p = problem_from_exact(g, halfspace(1, {1, 0}, 1.0 / 3), Cylinder{Point{}, 1.0}, 0.3);
    const ObstacleSolution s = solve_no_sign(p);
    CHECK(s.converged);
    CHECK(s.residual < 1e-10);
    // independent residual: H u = f off Lambda, H u in [0, f] (or [f, 0]) on Lambda
    double res = 0;
    for (auto idx : s.domain_interior.indices()) {
        const double hu = heat_operator(s.u, g.unflat(idx));
        if (s.u[idx] != 0.0) {
            res = std::max(res, std::abs(hu - p.f[idx]));
        } else {
            const double lo = std::min(0.0, p.f[idx]), hi = std::max(0.0, p.f[idx]);
            res = std::max(res, std::max(lo - hu, hu - hi));
        }
    }
    CHECK(res < 1e-10);
    // D~2 u vanishes on the stencil-interior of Lambda
    const CoincidenceSet& lam = s.coincidence;
    for (auto idx : lam.mask.indices()) {
        const NodeIndex a = g.unflat(idx);
        if (!has_stencil(g, a)) continue;
        bool inner = true;
        for (int d : {-1, 1}) {
            NodeIndex b = a;
            b.i[0] += d;
            inner = inner && lam.mask.contains(g.flat(b));
        }
        NodeIndex b = a;
        b.level -= 1;
        inner = inner && lam.mask.contains(g.flat(b));
        if (inner) CHECK(std::sqrt(tilde_d2(s.u, a).norm_sq()) <= 10 * (g.h() + g.k()));
    }
}

TEST_CASE("2D half-space and off-node case converge") {
    const SpaceTimeGrid g = make_grid(2, 1.25, 1.0 / 16, 1.25, 4.0 / 256);
    const ObstacleSolution s = solve(g, halfspace(2));
    CHECK(s.converged);
    CHECK(sup_error(s, halfspace(2)) < 1e-12);
    const ObstacleSolution s2 = solve(g, halfspace(2, {1, 0}, 1.0 / 3));
    CHECK(s2.converged);
    CHECK(s2.residual < 1e-10);
}

TEST_CASE("iteration cap reports non-convergence") {
    const SpaceTimeGrid g = make_grid(1, 1.25, 1.0 / 32, 1.25, 1.0 / 32);
    ObstacleProblem p = problem_from_exact(g, time_barrier(1, -0.5, 1.0), Cylinder{Point{}, 1.0});
    p.params.max_iter = 1;
    const ObstacleSolution s = solve_no_sign(p);
    CHECK_FALSE(s.converged);
    CHECK(s.unconverged_levels > 0);
}

TEST_CASE("coincidence set") {
    const SpaceTimeGrid g = make_grid(1, 1.0, 1.0 / 64, 1.0, 1.0 / 64);
    CHECK(coincidence_set(ScalarField::constant(g, 1.0), 1e-6).mask.empty());
    const CoincidenceSet zero = coincidence_set(ScalarField::zeros(g), 1e-6);
    CHECK(zero.mask.count() == zero.region.count());

    const double tol = default_tol_zero(g);
    CHECK(tol == doctest::Approx(g.h() * g.h() / 10));
    const ScalarField u = ScalarField::sample(g, halfspace(1).value);
    const CoincidenceSet lam = coincidence_set(u, tol);
    for (auto idx : lam.mask.indices()) CHECK(g.point(g.unflat(idx)).x[0] <= std::sqrt(2 * tol) + 1e-12);
    // monotone in the tolerance
    CHECK(lam.mask.subset_of(coincidence_set(u, 10 * tol).mask));
    CHECK(coincidence_set(u, 0.1 * tol).mask.subset_of(lam.mask));
}

TEST_CASE("free boundary of the half-space is the line x = 0") {
    const SpaceTimeGrid g = make_grid(2, 1.0, 1.0 / 16, 1.0, 1.0 / 64);
    const ScalarField u = ScalarField::sample(g, halfspace(2).value);
    const FreeBoundary fb = free_boundary(g, coincidence_set(u, default_tol_zero(g)));
    CHECK(!fb.nodes.empty());
    for (auto idx : fb.nodes.indices()) CHECK(std::abs(g.point(g.unflat(idx)).x[0]) < 1e-12);
    CHECK(free_boundary(g, coincidence_set(ScalarField::constant(g, 1.0), 1e-6)).nodes.empty());

    Point near;
    near.x = {0.3, 0.25};
    const auto p = nearest_free_boundary_point(g, fb, near);
    REQUIRE(p.has_value());
    CHECK(p->x[0] == 0.0);
    CHECK(p->x[1] == 0.25);
}

TEST_CASE("density and growth curves for the half-space") {
    const SpaceTimeGrid g = make_grid(1, 1.25, 1.0 / 64, 1.25, 4.0 / 4096);
    const ScalarField u = ScalarField::sample(g, halfspace(1).value);
    const CoincidenceSet lam = coincidence_set(u, default_tol_zero(g));
    const std::vector<double> radii = dyadic_radii(0.5, 4);
    const DiagnosticCurve lc = density_curve(g, lam, Point{}, radii);
    for (std::size_t i = 0; i < lc.size(); ++i) CHECK(std::abs(lc.values[i] - 0.5) <= 2 * g.h() / lc.radii[i]);
    const DiagnosticCurve mc = quadratic_growth_curve(u, Point{}, radii);
    for (double v : mc.values) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(density_curve(g, coincidence_set(ScalarField::constant(g, 1.0), 1e-6), Point{}, radii).values[0] == 0.0);
    CHECK(quadratic_growth_curve(ScalarField::zeros(g), Point{}, radii).values[0] == 0.0);

    std::array<std::array<double, kMaxDim>, kMaxDim> M{};
    M[0][0] = 1;
    const ScalarField up = ScalarField::sample(g, polynomial(1, M, 1.0).value);
    for (double v : quadratic_growth_curve(up, Point{}, radii).values) CHECK(v == doctest::Approx(0.5));
}
