#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "parobst/projection.hpp"

using namespace parobst;

namespace {

// Least squares over the parameters of the caloric space, solved by QR on the
// stacked D~2 components of every node in Q.
std::vector<double> lsq_oracle(const ScalarField& u, const Cylinder& q) {
    const auto& g = u.grid();
    const int n = g.dim();
    const NodeMask mask = cylinder_mask(g, q);
    const int comps = n * n + 1;
    const int params = n == 1 ? 1 : 3;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(mask.count()) * comps, params);
    Eigen::VectorXd b(A.rows());
    Eigen::Index row = 0;
    for (auto idx : mask.indices()) {
        const TildeD2 d = tilde_d2(u, g.unflat(idx));
        if (n == 1) {
            A(row, 0) = 1;
            b(row++) = d.hess[0][0];
            A(row, 0) = 1;
            b(row++) = d.dt;
        } else {
            // params (M11, M12, M22); components hess00, hess01, hess10, hess11, dt
            A(row, 0) = 1;
            b(row++) = d.hess[0][0];
            A(row, 1) = 1;
            b(row++) = d.hess[0][1];
            A(row, 1) = 1;
            b(row++) = d.hess[1][0];
            A(row, 2) = 1;
            b(row++) = d.hess[1][1];
            A(row, 0) = 1;
            A(row, 2) = 1;
            b(row++) = d.dt;
        }
    }
    const Eigen::VectorXd x = A.householderQr().solve(b);
    return std::vector<double>(x.data(), x.data() + x.size());
}

ScalarField random_field(const SpaceTimeGrid& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-1, 1);
    const double a = U(rng), b = U(rng), c = U(rng), d = U(rng), e = U(rng), w = 1 + 2 * (U(rng) + 1);
    return ScalarField::sample(g, [=](const Point& p) {
        const double x = p.x[0], y = p.x[1], t = p.t;
        return a * x * x + b * x * y + c * y * y * y + d * t + e * std::sin(w * x + y) * std::exp(t) + a * b * x * x * t;
    });
}

CaloricQuadratic make_q(int n, double m11, double m12, double m22) {
    CaloricQuadratic p;
    p.n = n;
    p.M[0][0] = m11;
    if (n == 2) {
        p.M[0][1] = p.M[1][0] = m12;
        p.M[1][1] = m22;
    }
    p.m = p.trace();
    return p;
}

}  // namespace

TEST_CASE("closed form agrees with an independent least-squares solve") {
    std::mt19937_64 rng(11);
    for (int n : {1, 2}) {
        const SpaceTimeGrid g = n == 1 ? make_grid(1, 1.25, 1.0 / 32, 1.25, 1.0 / 256) : make_grid(2, 1.25, 1.0 / 16, 1.25, 1.0 / 64);
        for (int trial = 0; trial < 20; ++trial) {
            const ScalarField u = random_field(g, rng);
            Point c;
            c.x[0] = 0.125 * (trial % 3 - 1);
            c.t = -0.25 * (trial % 2);
            const Cylinder q{c, trial % 2 ? 0.5 : 0.75};
            const ProjectionResult pr = project(u, q);
            const std::vector<double> ls = lsq_oracle(u, q);
            CHECK(pr.Pi.M[0][0] == doctest::Approx(ls[0]).epsilon(1e-9).scale(1));
            if (n == 2) {
                CHECK(pr.Pi.M[0][1] == doctest::Approx(ls[1]).epsilon(1e-9).scale(1));
                CHECK(pr.Pi.M[1][0] == doctest::Approx(ls[1]).epsilon(1e-9).scale(1));
                CHECK(pr.Pi.M[1][1] == doctest::Approx(ls[2]).epsilon(1e-9).scale(1));
            }
            CHECK(pr.Pi.m == doctest::Approx(pr.Pi.trace()).epsilon(1e-14));
        }
    }
}

TEST_CASE("half-space projection values") {
    const SpaceTimeGrid g = make_grid(1, 1.25, 1.0 / 64, 1.25, 4.0 / 4096);
    const ScalarField u = ScalarField::sample(g, [](const Point& p) {
        const double s = std::max(0.0, p.x[0]);
        return 0.5 * s * s;
    });
    const ProjectionResult pr = project(u, Cylinder{Point{}, 0.5});
    // the x = 0 column carries D~2 u = 1/2, which biases A by O(h/r)
    CHECK(std::abs(pr.Pi.M[0][0] - 0.25) <= g.h() / 0.5);
    CHECK(std::abs(pr.S - std::sqrt(2.0) / 4) <= 2 * g.h() / 0.5);
    REQUIRE(pr.p_unit.has_value());
    CHECK(pr.p_unit->norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(pr.p_unit->scaled(pr.S).M[0][0] == doctest::Approx(pr.Pi.M[0][0]).epsilon(1e-14));

    const DiagnosticCurve s = s_curve(u, Point{}, {0.5, 0.25, 0.125});
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(std::abs(s.values[i] - std::sqrt(2.0) / 4) <= 2 * g.h() / s.radii[i]);

    // mean of |D~2 u - D~2 Pi|^2 is 3/8, and |Q_r| = 2 r^3
    for (double r : {0.5, 0.25, 0.125}) CHECK(std::abs(bmo_residual(u, Cylinder{Point{}, r}) - std::sqrt(0.75)) <= 2 * g.h() / r);
}

TEST_CASE("2D half-space projection") {
    const SpaceTimeGrid g = make_grid(2, 1.25, 1.0 / 32, 1.25, 4.0 / 1024);
    const ScalarField u = ScalarField::sample(g, [](const Point& p) {
        const double s = std::max(0.0, p.x[0]);
        return 0.5 * s * s;
    });
    const ProjectionResult pr = project(u, Cylinder{Point{}, 0.5});
    // A = diag(1/2, 0), a = 0: M = A - I/6
    CHECK(std::abs(pr.Pi.M[0][0] - 1.0 / 3) <= g.h() / 0.5);
    CHECK(std::abs(pr.Pi.M[1][1] + 1.0 / 6) <= g.h() / 0.5);
    CHECK(pr.Pi.M[0][1] == doctest::Approx(0.0).scale(1));
    CHECK(std::abs(pr.S - 1 / std::sqrt(6.0)) <= 2 * g.h() / 0.5);
}

TEST_CASE("idempotence, linear fields and linearity") {
    for (int n : {1, 2}) {
        const SpaceTimeGrid g = n == 1 ? make_grid(1, 1.25, 1.0 / 32, 1.25, 1.0 / 256) : make_grid(2, 1.25, 1.0 / 16, 1.25, 1.0 / 64);
        const CaloricQuadratic p = make_q(n, 1.3, n == 2 ? -0.4 : 0.0, n == 2 ? 0.7 : 0.0);
        Point c;
        c.x[0] = 0.25;
        c.t = -0.125;
        const ScalarField u = ScalarField::sample(g, [&](const Point& X) { return p(X); });
        for (double r : {0.75, 0.5, 0.25}) {
            const Cylinder q{c, r};
            const ProjectionResult pr = project(u, q);
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) CHECK(pr.Pi.M[a][b] == doctest::Approx(p.M[a][b]).epsilon(1e-10).scale(1));
            CHECK(pr.Pi.m == doctest::Approx(p.m).epsilon(1e-10));
            CHECK(pr.S == doctest::Approx(p.norm()).epsilon(1e-10));
            CHECK(bmo_residual(u, q) < 1e-9);
        }

        const ScalarField lin = ScalarField::sample(g, [](const Point& X) { return 0.3 * X.x[0] - 2 * X.x[1] + 5; });
        const ProjectionResult z = project(lin, Cylinder{Point{}, 0.5});
        CHECK(z.S < 1e-10);
        CHECK_FALSE(z.p_unit.has_value());

        std::mt19937_64 rng(5);
        const ScalarField v = random_field(g, rng), w = random_field(g, rng);
        const Cylinder q{Point{}, 0.5};
        const ProjectionResult pv = project(v, q), pw = project(w, q), pvw = project(v.axpby(2.0, w, -0.5), q);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) CHECK(std::abs(pvw.Pi.M[a][b] - (2 * pv.Pi.M[a][b] - 0.5 * pw.Pi.M[a][b])) < 1e-12);
        CHECK(std::abs(pvw.Pi.m - (2 * pv.Pi.m - 0.5 * pw.Pi.m)) < 1e-12);
    }
}

TEST_CASE("orthogonality of the residual to the caloric space") {
    const SpaceTimeGrid g = make_grid(2, 1.25, 1.0 / 16, 1.25, 1.0 / 64);
    std::mt19937_64 rng(9);
    const ScalarField u = random_field(g, rng);
    const Cylinder q{Point{}, 0.75};
    const ProjectionResult pr = project(u, q);
    const NodeMask mask = cylinder_mask(g, q);
    // <D~2 u - D~2 Pi, D~2 e> = 0 for each basis element e
    for (const CaloricQuadratic& e : {make_q(2, 1, 0, 0), make_q(2, 0, 1, 0), make_q(2, 0, 0, 1)}) {
        double ip = 0, scale = 0;
        for (auto idx : mask.indices()) {
            const TildeD2 d = tilde_d2(u, g.unflat(idx));
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    ip += (d.hess[a][b] - pr.Pi.M[a][b]) * e.M[a][b];
                    scale += std::abs(d.hess[a][b] * e.M[a][b]);
                }
            ip += (d.dt - pr.Pi.m) * e.m;
            scale += std::abs(d.dt * e.m);
        }
        CHECK(std::abs(ip) <= 1e-12 * scale);
    }
}

TEST_CASE("parabolic scaling covariance") {
    // u(lambda x, lambda^2 t) projects with the same M on the rescaled cylinder times lambda^2
    const SpaceTimeGrid g = make_grid(1, 1.25, 1.0 / 64, 1.25, 1.0 / 4096);
    const Evaluator f = [](const Point& X) { return std::cos(X.x[0]) * std::exp(0.5 * X.t) + X.x[0] * X.x[0] * X.x[0]; };
    const double lam = 2.0;
    const ScalarField u = ScalarField::sample(g, f);
    const ScalarField ul = ScalarField::sample(g, [&](const Point& X) {
        Point Y = X;
        Y.x[0] *= lam;
        Y.t *= lam * lam;
        return f(Y);
    });
    const ProjectionResult a = project(u, Cylinder{Point{}, 0.5});
    const ProjectionResult b = project(ul, Cylinder{Point{}, 0.25});
    // grids differ by the rescale, so agreement is to discretisation order
    CHECK(b.Pi.M[0][0] == doctest::Approx(lam * lam * a.Pi.M[0][0]).epsilon(0.02));
}

TEST_CASE("polynomial evaluation, homogeneity and sup norm") {
    const CaloricQuadratic p = make_q(2, 1.0, 0.5, -3.0);
    Point X;
    X.x = {0.3, -0.7};
    X.t = -0.2;
    const double lam = 1.7;
    Point Y = X;
    Y.x = {lam * X.x[0], lam * X.x[1]};
    Y.t = lam * lam * X.t;
    CHECK(p(Y) == doctest::Approx(lam * lam * p(X)).epsilon(1e-14));
    CHECK(p(X) == doctest::Approx(0.5 * (0.09 - 0.21 - 3 * 0.49) + (-2.0) * (-0.2)).epsilon(1e-14));
    // brute-force sup over the unit cylinder
    double sup = 0;
    for (int i = 0; i <= 200; ++i)
        for (int j = 0; j <= 200; ++j) {
            Point Z;
            const double th = 2 * M_PI * i / 200, rho = j / 200.0;
            Z.x = {rho * std::cos(th), rho * std::sin(th)};
            for (double t : {-1.0, 0.0}) {
                Z.t = t;
                sup = std::max(sup, std::abs(p(Z)));
            }
        }
    CHECK(p.sup_unit_cylinder() >= sup - 1e-12);
    CHECK(p.sup_unit_cylinder() <= sup * (1 + 1e-3));
}

TEST_CASE("q-polynomial blocks") {
    const SpaceTimeGrid g = make_grid(1, 1.25, 1.0 / 32, 1.25, 1.0 / 256);
    const Cylinder q{Point{}, 0.5};
    const QBlock b1 = q_polynomial(ScalarField::sample(g, [](const Point& X) { return 0.5 * X.x[0] * X.x[0]; }), q);
    CHECK(b1.block[0][0] == doctest::Approx(0.5));
    CHECK(b1.block[1][1] == doctest::Approx(-0.5));
    CHECK(std::abs(b1.trace()) < 1e-12);
    CHECK(b1.mean_heat == doctest::Approx(1.0));

    // block entry for time is -u_t, so its trace is Hu
    const QBlock b2 = q_polynomial(ScalarField::sample(g, [](const Point& X) { return X.t; }), q);
    CHECK(b2.block[0][0] == doctest::Approx(0.5));
    CHECK(b2.block[1][1] == doctest::Approx(-0.5));
    CHECK(std::abs(b2.trace()) < 1e-12);
    const CaloricQuadratic qp = b2.polynomial();
    CHECK_FALSE(qp.caloric);
    CHECK(qp.M[0][0] == doctest::Approx(0.5));
    CHECK(qp.m == doctest::Approx(0.5));

    // caloric input: no correction
    const ScalarField cal = ScalarField::sample(g, [](const Point& X) { return X.x[0] * X.x[0] + 2 * X.t; });
    const QBlock b3 = q_polynomial(cal, q);
    CHECK(b3.mean_heat == doctest::Approx(0.0).scale(1));
    CHECK(b3.block[0][0] == doctest::Approx(2.0));
    CHECK(b3.block[1][1] == doctest::Approx(-2.0));
}

TEST_CASE("BMO residual of x^4 decays with r") {
    const SpaceTimeGrid g = make_grid(1, 1.25, 1.0 / 128, 1.25, 1.0 / 4096);
    const ScalarField u = ScalarField::sample(g, [](const Point& X) { return std::pow(X.x[0], 4); });
    const double r1 = bmo_residual(u, Cylinder{Point{}, 0.5}), r2 = bmo_residual(u, Cylinder{Point{}, 0.25}),
                 r3 = bmo_residual(u, Cylinder{Point{}, 0.125});
    CHECK(std::log2(r1 / r2) >= 0.9);
    CHECK(std::log2(r2 / r3) >= 0.9);

    // S of 1/2 x^2 + x^4 tends to sqrt(2)/2
    const ScalarField v = ScalarField::sample(g, [](const Point& X) { return 0.5 * X.x[0] * X.x[0] + std::pow(X.x[0], 4); });
    const DiagnosticCurve s = s_curve(v, Point{}, {0.5, 0.25, 0.125, 0.0625});
    for (std::size_t i = 1; i < s.size(); ++i)
        CHECK(std::abs(s.values[i] - std::sqrt(0.5)) < std::abs(s.values[i - 1] - std::sqrt(0.5)));
    CHECK(s.values.back() == doctest::Approx(std::sqrt(0.5)).epsilon(0.01));
}

TEST_CASE("Poincare residual") {
    const SpaceTimeGrid g = make_grid(1, 1.25, 1.0 / 32, 1.25, 1.0 / 256);
    const Cylinder q{Point{}, 1.0};
    const PoincareResult aff = poincare_residual(ScalarField::sample(g, [](const Point& X) { return 2 - 3 * X.x[0]; }), q);
    CHECK(aff.lhs < 1e-12);
    CHECK(aff.ratio == 0.0);
    CHECK(aff.degenerate);

    std::vector<double> quad, time;
    for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
        const SpaceTimeGrid gh = make_grid(1, 1.25, h, 1.25, h * h);
        quad.push_back(poincare_residual(ScalarField::sample(gh, [](const Point& X) { return 0.5 * X.x[0] * X.x[0]; }), q).ratio);
        time.push_back(poincare_residual(ScalarField::sample(gh, [](const Point& X) { return X.t; }), q).ratio);
    }
    for (const auto* v : {&quad, &time}) {
        CHECK((*v)[2] > 0);
        CHECK(std::isfinite((*v)[2]));
        CHECK(std::abs((*v)[2] - (*v)[1]) <= std::abs((*v)[1] - (*v)[0]) + 1e-12);
    }
}

TEST_CASE("degenerate cylinder throws") {
    const SpaceTimeGrid g = make_grid(1, 1.0, 1.0 / 16, 1.0, 1.0 / 64);
    CHECK_THROWS_AS(project(ScalarField::zeros(g), Cylinder{Point{}, 1.0}), DomainError);   // no stencil margin
}
