#include <doctest.h>

#include <cmath>

#include "parobst/heat_solver.hpp"

using namespace parobst;

namespace {

double max_diff_on(const ScalarField& a, const Evaluator& e, const NodeMask& m) {
    const SpaceTimeGrid& g = a.grid();
    double d = 0;
    for (auto idx : m.indices()) d = std::max(d, std::abs(a[idx] - e(g.point(g.unflat(idx)))));
    return d;
}

}  // namespace

TEST_CASE("caloric polynomial reproduced exactly") {
    for (int n : {1, 2}) {
        const SpaceTimeGrid g = n == 1 ? make_grid(1, 1.25, 1.0 / 32, 1.25, 1.0 / 64) : make_grid(2, 1.25, 1.0 / 16, 1.25, 1.0 / 32);
        const Evaluator p = [](const Point& X) { return X.x[0] * X.x[0] + 2 * X.t; };
        const Cylinder q{Point{}, 1.0};
        const ScalarField w = solve_dirichlet({q, ScalarField::zeros(g), ScalarField::sample(g, p)});
        CHECK(max_diff_on(w, p, cylinder_domain(g, q).all) < 1e-11);
        CHECK(max_diff_on(caloric_extension(ScalarField::constant(g, 2.5), q), [](const Point&) { return 2.5; },
                          cylinder_domain(g, q).all) < 1e-11);
    }
}

TEST_CASE("stencil-exact polynomials with constant right-hand side") {
    const SpaceTimeGrid g = make_grid(2, 1.25, 1.0 / 16, 1.25, 1.0 / 32);
    // tr M - m = f
    const Evaluator p = [](const Point& X) {
        const double x = X.x[0], y = X.x[1];
        return 0.5 * (1.5 * x * x - 0.6 * x * y + 0.4 * y * y) + 0.3 * x - 0.2 * y + (-0.1) * X.t + 0.7;
    };
    const double f = 1.5 + 0.4 - (-0.1);
    const Cylinder q{Point{}, 1.0};
    const ScalarField w = solve_dirichlet({q, ScalarField::constant(g, f), ScalarField::sample(g, p)});
    CHECK(max_diff_on(w, p, cylinder_domain(g, q).all) < 1e-11);

    const SpaceTimeGrid g1 = make_grid(1, 1.25, 1.0 / 32, 1.25, 1.0 / 64);
    const Evaluator half = [](const Point& X) { return 0.5 * X.x[0] * X.x[0]; };
    const ScalarField w1 = solve_dirichlet({q, ScalarField::constant(g1, 1.0), ScalarField::sample(g1, half)});
    CHECK(max_diff_on(w1, half, cylinder_domain(g1, q).all) < 1e-12);
}

TEST_CASE("discrete maximum principle and linearity") {
    const SpaceTimeGrid g = make_grid(1, 1.25, 1.0 / 32, 1.25, 1.0 / 64);
    const Cylinder q{Point{}, 1.0};
    const ScalarField b1 = ScalarField::sample(g, [](const Point& X) {
        const double s = std::max(0.0, X.x[0]);
        return 0.5 * s * s;
    });
    const ScalarField b2 = ScalarField::sample(g, [](const Point& X) { return std::cos(3 * X.x[0]) * std::exp(X.t); });
    const CylinderDomain dom = cylinder_domain(g, q);
    const ScalarField w = caloric_extension(b1, q);
    double bmin = INFINITY, bmax = -INFINITY;
    for (const NodeMask* m : {&dom.lateral, &dom.bottom})
        for (auto idx : m->indices()) {
            bmin = std::min(bmin, b1[idx]);
            bmax = std::max(bmax, b1[idx]);
        }
    for (auto idx : dom.interior.indices()) {
        CHECK(w[idx] >= bmin - 1e-14);
        CHECK(w[idx] <= bmax + 1e-14);
    }

    const ScalarField f1 = ScalarField::sample(g, [](const Point& X) { return X.x[0] - X.t; });
    const ScalarField f2 = ScalarField::constant(g, -0.5);
    const ScalarField s1 = solve_dirichlet({q, f1, b1});
    const ScalarField s2 = solve_dirichlet({q, f2, b2});
    const ScalarField s12 = solve_dirichlet({q, f1.axpby(2.0, f2, -3.0), b1.axpby(2.0, b2, -3.0)});
    for (auto idx : dom.all.indices()) CHECK(std::abs(s12[idx] - (2 * s1[idx] - 3 * s2[idx])) < 1e-12);
}

TEST_CASE("discrete solution satisfies the scheme") {
    const SpaceTimeGrid g = make_grid(2, 1.25, 1.0 / 16, 1.25, 1.0 / 32);
    const Cylinder q{Point{}, 1.0};
    const ScalarField f = ScalarField::sample(g, [](const Point& X) { return std::sin(X.x[0] + 2 * X.x[1]) + X.t; });
    const ScalarField w = solve_dirichlet({q, f, ScalarField::zeros(g)});
    const CylinderDomain dom = cylinder_domain(g, q);
    for (auto idx : dom.interior.indices()) CHECK(std::abs(heat_operator(w, g.unflat(idx)) - f[idx]) < 1e-10);
    for (auto idx : dom.lateral.indices()) CHECK(w[idx] == 0.0);
}

TEST_CASE("kernel convolution") {
    const SpaceTimeGrid g = make_grid(1, 1.25, 1.0 / 16, 1.25, 1.0 / 64);
    const ScalarField z = kernel_convolution(ScalarField::zeros(g));
    for (double v : z.values()) CHECK(v == 0.0);

    std::vector<double> delta(g.size(), 0.0);
    NodeIndex a;
    a.i[0] = g.center_index();
    a.level = g.nt() / 2;
    delta[g.flat(a)] = 1.0;
    const ScalarField k = kernel_convolution(ScalarField(g, delta));
    for (double v : k.values()) CHECK(v >= 0.0);

    // H g = -source away from the bottom, first order in k
    double prev = INFINITY;
    for (double kk : {1.0 / 16, 1.0 / 64}) {
        const SpaceTimeGrid gk = make_grid(1, 1.25, 1.0 / 16, 1.25, kk);
        const ScalarField src = ScalarField::sample(gk, [](const Point& X) { return X.x[0] <= 0 ? -1.0 : 0.0; });
        const ScalarField gg = kernel_convolution(src);
        double res = 0;
        const NodeMask m = cylinder_mask(gk, Cylinder{Point{}, 0.5});
        for (auto idx : m.indices()) {
            const Point p = gk.point(gk.unflat(idx));
            if (std::abs(p.x[0]) < 0.2) continue;   // stay off the jump of the source
            res = std::max(res, std::abs(heat_operator(gg, gk.unflat(idx)) + src[idx]));
        }
        CHECK(res < prev);
        prev = res;
    }
}

TEST_CASE("interior derivative and zero-boundary ratios") {
    const Cylinder q{Point{}, 1.0};
    std::vector<double> ratios;
    for (double h : {1.0 / 16, 1.0 / 32}) {
        const SpaceTimeGrid g = make_grid(1, 1.25, h, 1.25, h * h);
        const ScalarField w = ScalarField::sample(g, [](const Point& X) { return X.x[0] * X.x[0] + 2 * X.t; });
        ratios.push_back(interior_derivative_ratio(w, q));
        CHECK(ratios.back() > 0);
        CHECK_THROWS_AS(interior_derivative_ratio(ScalarField::zeros(g), q), DomainError);
        // constant: D~2 c = 0
        CHECK(interior_derivative_ratio(ScalarField::constant(g, 1.0), q) == 0.0);
    }
    CHECK(std::abs(ratios[1] / ratios[0] - 1) < 0.05);

    // Lemma-5 type ratio stays bounded over r for a zero-boundary solve
    const SpaceTimeGrid g = make_grid(1, 1.25, 1.0 / 64, 1.25, 1.0 / 1024);
    const ScalarField f = ScalarField::constant(g, 1.0);
    double lo = INFINITY, hi = 0;
    for (double r : {1.0, 0.5, 0.25}) {
        const Cylinder qr{Point{}, r};
        const ZeroBoundaryRatio z = zero_boundary_ratio(solve_dirichlet({qr, f, ScalarField::zeros(g)}), f, qr);
        lo = std::min(lo, z.scale_free);
        hi = std::max(hi, z.scale_free);
        CHECK(z.literal > 0);
    }
    CHECK(hi / lo < 2.0);
}
