#include "parobst/acceptance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <random>

#include "parobst/decomposition.hpp"
#include "parobst/exact.hpp"
#include "parobst/heat_solver.hpp"
#include "parobst/obstacle.hpp"
#include "parobst/projection.hpp"
#include "parobst/seed.hpp"
#include "parobst/weiss.hpp"

namespace parobst {

namespace {

// Pinned tolerances.
constexpr double kOrderHalf = 1.9;
constexpr double kOrderBarrier = 0.9;
constexpr double kHalfspaceExact = 1e-10;
constexpr double kLinearity = 1e-12;
constexpr double kBmoSpread = 0.02;
constexpr double kBmoOrder = 0.9;
// Dirichlet solves are direct (sparse LDLT); this is the tolerance they are held to.
constexpr double kSolverTol = 1e-10;
constexpr double kWeissExact = 1e-6;
constexpr double kRatioTol = 0.005;
constexpr double kBlowupAligned = 1e-12;
constexpr double kBlowupSlopeLo = 0.9, kBlowupSlopeHi = 1.1;
constexpr double kGrowthTol = 0.02;
constexpr double kEulerExact = 1e-10;
// Regression value: largest telescope projection sup measured on the synthetic
// geometric Lambda (0.3527 at h = 1/32, J = 3, seed 0), frozen with a factor 2 margin.
constexpr double kTelescopeSupBound = 0.75;

std::string fmt(const char* f, double v) {
    char b[64];
    std::snprintf(b, sizeof b, f, v);
    return b;
}
std::string e3(double v) { return fmt("%.3e", v); }
std::string f4(double v) { return fmt("%.4f", v); }

struct Case {
    std::string label;
    SpaceTimeGrid g;
    ExactProfile e;
    ObstacleProblem p;
    ObstacleSolution s;
    FreeBoundary fb;
    Point center;
};

Case solve_case(std::string label, int n, double h, ExactProfile e, double eps, Point hint) {
    Case c;
    c.label = std::move(label);
    c.g = make_grid(n, 1.25, h, 1.25, 4 * h * h);
    c.e = std::move(e);
    c.p = problem_from_exact(c.g, c.e, Cylinder{Point{}, 1.0}, eps);
    c.s = solve_no_sign(c.p);
    c.fb = free_boundary(c.g, c.s.coincidence);
    auto fbp = nearest_free_boundary_point(c.g, c.fb, hint);
    if (!fbp) throw DomainError(c.label + ": no free boundary node on the level of the requested center");
    c.center = *fbp;
    return c;
}

// Solved scenarios shared by several criteria, built on first use.
class Suite {
public:
    const Case& half1() { return get(0, [] { return solve_case("halfspace n=1", 1, 1.0 / 64, halfspace(1), 0, {}); }); }
    const Case& off1() {
        return get(1, [] {
            return solve_case("offset halfspace n=1", 1, 1.0 / 64, halfspace(1, {1, 0}, 1.0 / 3), 0.3,
                              Point{{1.0 / 3, 0}, 0});
        });
    }
    const Case& bar1() {
        return get(2, [] {
            Point hint;
            hint.t = -0.5;
            return solve_case("time barrier n=1", 1, 1.0 / 64, time_barrier(1, -0.5, 1.0), 0, hint);
        });
    }
    const Case& half2() { return get(3, [] { return solve_case("halfspace n=2", 2, 1.0 / 32, halfspace(2), 0, {}); }); }
    const Case& off2() {
        return get(4, [] {
            return solve_case("offset halfspace n=2", 2, 1.0 / 32, halfspace(2, {1, 0}, 1.0 / 3), 0.0,
                              Point{{1.0 / 3, 0}, 0});
        });
    }
    std::vector<const Case*> all() { return {&half1(), &off1(), &bar1(), &half2(), &off2()}; }

private:
    const Case& get(int i, const std::function<Case()>& make) {
        auto& slot = cache_[static_cast<std::size_t>(i)];
        if (!slot) slot = std::make_unique<Case>(make());
        return *slot;
    }
    std::unique_ptr<Case> cache_[5];
};

double sup_error(const ObstacleSolution& s, const ExactProfile& e) {
    const SpaceTimeGrid& g = s.u.grid();
    double err = 0;
    for (auto i : s.domain_interior.indices()) err = std::max(err, std::abs(s.u[i] - e.value(g.point(g.unflat(i)))));
    return err;
}

// 1 exact-solution recovery, h and k = h halved twice; order from the end points.
CriterionResult c1() {
    CriterionResult r{1, "exact-solution recovery", true, ""};
    double eh[3], eb[3];
    bool conv = true;
    int i = 0;
    for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
        const SpaceTimeGrid g = make_grid(1, 1.25, h, 1.25, h);
        const ExactProfile half = halfspace(1, {1, 0}, 1.0 / 3);
        const ExactProfile bar = time_barrier(1, -1.0 / 3, 1.0);
        const ObstacleSolution sh = solve_no_sign(problem_from_exact(g, half, Cylinder{Point{}, 1.0}));
        const ObstacleSolution sb = solve_no_sign(problem_from_exact(g, bar, Cylinder{Point{}, 1.0}));
        conv = conv && sh.converged && sb.converged;
        eh[i] = sup_error(sh, half);
        eb[i] = sup_error(sb, bar);
        ++i;
    }
    const double oh = 0.5 * std::log2(eh[0] / eh[2]);
    const double ob = 0.5 * std::log2(eb[0] / eb[2]);
    const SpaceTimeGrid g = make_grid(1, 1.25, 1.0 / 32, 1.25, 1.0 / 32);
    const double on_node = sup_error(solve_no_sign(problem_from_exact(g, halfspace(1), Cylinder{Point{}, 1.0})), halfspace(1));
    r.passed = conv && oh >= kOrderHalf && ob >= kOrderBarrier && on_node <= kHalfspaceExact;
    r.detail = "half-space errors " + e3(eh[0]) + " " + e3(eh[1]) + " " + e3(eh[2]) + " order " + f4(oh) +
               " (>= 1.9); barrier errors " + e3(eb[0]) + " " + e3(eb[1]) + " " + e3(eb[2]) + " order " + f4(ob) +
               " (>= 0.9); on-node half-space error " + e3(on_node);
    return r;
}

// Random smooth field: quadratic, cubic and oscillatory terms in x and t.
Evaluator random_field(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::array<double, 12> a{};
    for (double& v : a) v = U(rng);
    if (n == 1) a[1] = a[2] = a[9] = 0;
    return [a](const Point& p) {
        const double x = p.x[0], y = p.x[1], t = p.t;
        return a[0] * x * x + a[1] * x * y + a[2] * y * y + a[3] * t + a[4] * x * x * x + a[5] * x * t +
               a[6] * t * t + a[7] * std::sin(2 * a[8] * x + 2 * a[9] * y + a[10] * t) + a[11] * x;
    };
}

// Least-squares objective sum |D~2 u - D~2 p|^2 over the cylinder nodes, for the
// symmetric M (m = tr M). Evaluated directly, no normal equations.
struct LsObjective {
    int n;
    std::vector<std::array<double, 4>> d;   // H11, H12, H22, u_t

    LsObjective(const ScalarField& u, const Cylinder& q) : n(u.grid().dim()) {
        const NodeMask mask = cylinder_mask(u.grid(), q);
        for (auto idx : mask.indices()) {
            const TildeD2 t = tilde_d2(u, u.grid().unflat(idx));
            d.push_back({t.hess[0][0], n == 2 ? t.hess[0][1] : 0.0, n == 2 ? t.hess[1][1] : 0.0, t.dt});
        }
    }
    double operator()(double m11, double m12, double m22) const {
        double s = 0;
        const double tr = m11 + (n == 2 ? m22 : 0.0);
        for (const auto& x : d) {
            double v = (x[0] - m11) * (x[0] - m11) + (x[3] - tr) * (x[3] - tr);
            if (n == 2) v += 2 * (x[1] - m12) * (x[1] - m12) + (x[2] - m22) * (x[2] - m22);
            s += v;
        }
        return s;
    }
};

struct Sweep {
    std::array<double, 3> M{};
    double step = 0;
};

// Coarse-to-fine grid sweep over the symmetric matrices.
Sweep brute_force(const LsObjective& F, double final_step) {
    std::array<double, 3> c{0, 0, 0};
    double step = 4.0;
    const int half = 4;
    const int m12 = F.n == 2 ? half : 0;
    while (true) {
        double best = INFINITY;
        std::array<double, 3> arg = c;
        for (int i = -half; i <= half; ++i)
            for (int j = -m12; j <= m12; ++j)
                for (int k = -m12; k <= m12; ++k) {
                    const std::array<double, 3> M{c[0] + i * step, c[1] + j * step, c[2] + k * step};
                    const double v = F(M[0], M[1], M[2]);
                    if (v < best) {
                        best = v;
                        arg = M;
                    }
                }
        c = arg;
        if (step <= final_step) return {c, step};
        step *= 0.6;
    }
}

// 2 projection against a brute-force least-squares sweep, and the half-space values.
CriterionResult c2() {
    CriterionResult r{2, "projection oracle", true, ""};
    std::mt19937_64 rng(20240601);
    double worst = 0;
    bool better = true;
    for (int n : {1, 2}) {
        const SpaceTimeGrid g = n == 1 ? make_grid(1, 1.0, 1.0 / 32, 1.0, 1.0 / 256) : make_grid(2, 1.0, 1.0 / 16, 1.0, 1.0 / 64);
        const Cylinder q{Point{}, 0.5};
        for (int f = 0; f < 10; ++f) {
            const ScalarField u = ScalarField::sample(g, random_field(rng, n)).sampled_only();
            const ProjectionResult pr = project(u, q);
            const LsObjective F(u, q);
            const Sweep sw = brute_force(F, 1e-4);
            const std::array<double, 3> mc{pr.Pi.M[0][0], n == 2 ? pr.Pi.M[0][1] : 0.0, n == 2 ? pr.Pi.M[1][1] : 0.0};
            for (int a = 0; a < 3; ++a) worst = std::max(worst, std::abs(mc[static_cast<std::size_t>(a)] - sw.M[static_cast<std::size_t>(a)]) / sw.step);
            if (F(mc[0], mc[1], mc[2]) > F(sw.M[0], sw.M[1], sw.M[2]) * (1 + 1e-12) + 1e-15) better = false;
        }
    }
    const SpaceTimeGrid g1 = make_grid(1, 1.0, 1.0 / 64, 1.0, 1.0 / 64);
    const ProjectionResult h1 = project(ScalarField::sample(g1, halfspace(1).value).sampled_only(), Cylinder{Point{}, 0.5});
    const double d1 = std::max({std::abs(h1.Pi.M[0][0] - 0.25), std::abs(h1.Pi.m - 0.25), std::abs(h1.S - std::sqrt(2.0) / 4)});
    // n = 2: mean Hessian diag(1/2, 0), a = 0, so M = diag(1/3, -1/6), m = 1/6, S = 1/sqrt 6.
    const SpaceTimeGrid g2 = make_grid(2, 1.0, 1.0 / 16, 1.0, 1.0 / 64);
    const ProjectionResult h2 = project(ScalarField::sample(g2, halfspace(2).value).sampled_only(), Cylinder{Point{}, 0.5});
    const double d2 = std::max({std::abs(h2.Pi.M[0][0] - 1.0 / 3), std::abs(h2.Pi.M[1][1] + 1.0 / 6),
                                std::abs(h2.Pi.M[0][1]), std::abs(h2.Pi.m - 1.0 / 6), std::abs(h2.S - 1 / std::sqrt(6.0))});
    r.passed = worst <= 2.0 && better && d1 <= kHalfspaceExact && d2 <= kHalfspaceExact;
    r.detail = "20 fields: max |M - M_sweep| = " + f4(worst) + " sweep steps (<= 2), closed form never worse: " +
               (better ? "yes" : "no") + "; half-space n=1 deviation " + e3(d1) + ", n=2 " + e3(d2) + " (<= 1e-10)";
    return r;
}

double quad_diff(const CaloricQuadratic& a, const CaloricQuadratic& b) {
    double d = std::abs(a.m - b.m);
    for (int i = 0; i < kMaxDim; ++i)
        for (int j = 0; j < kMaxDim; ++j) d = std::max(d, std::abs(a.M[i][j] - b.M[i][j]));
    return d;
}

double quad_size(const CaloricQuadratic& a) { return std::max(1.0, a.norm()); }

// 3 linearity and scale covariance.
CriterionResult c3() {
    CriterionResult r{3, "projection linearity and scale covariance", true, ""};
    std::mt19937_64 rng(7);
    double lin = 0, cov = 0;
    for (int n : {1, 2}) {
        const SpaceTimeGrid g = n == 1 ? make_grid(1, 1.0, 1.0 / 64, 1.0, 1.0 / 256) : make_grid(2, 1.0, 1.0 / 16, 1.0, 1.0 / 64);
        for (int trial = 0; trial < 5; ++trial) {
            const ScalarField u = ScalarField::sample(g, random_field(rng, n)).sampled_only();
            const ScalarField v = ScalarField::sample(g, random_field(rng, n)).sampled_only();
            const double a = 1.75, b = -0.625;
            const Cylinder q{Point{}, 0.5};
            const CaloricQuadratic pu = project(u, q).Pi, pv = project(v, q).Pi;
            const CaloricQuadratic pw = project(u.axpby(a, v, b), q).Pi;
            CaloricQuadratic comb = pu.scaled(a);
            const CaloricQuadratic vb = pv.scaled(b);
            comb.m += vb.m;
            for (int i = 0; i < kMaxDim; ++i)
                for (int j = 0; j < kMaxDim; ++j) comb.M[i][j] += vb.M[i][j];
            lin = std::max(lin, quad_diff(pw, comb) / quad_size(comb));
            for (double rr : {0.5, 0.25}) {
                const CaloricQuadratic direct = project(u, Cylinder{Point{}, rr}).Pi;
                const CaloricQuadratic scaled = project(rescale(u, rr, Point{}), Cylinder{Point{}, 1.0}).Pi;
                cov = std::max(cov, quad_diff(direct, scaled) / quad_size(direct));
            }
        }
    }
    r.passed = lin <= kLinearity && cov <= kLinearity;
    r.detail = "linearity defect " + e3(lin) + ", scale covariance defect " + e3(cov) + " (<= 1e-12, relative)";
    return r;
}

// 4 BMO residual: flat for the half-space, decaying for x^4.
CriterionResult c4() {
    CriterionResult r{4, "BMO residual scaling", true, ""};
    const SpaceTimeGrid g = make_grid(1, 1.0, 1.0 / 128, 1.0, 1.0 / 128);
    const ScalarField hs = ScalarField::sample(g, halfspace(1).value).sampled_only();
    const ScalarField qu = ScalarField::sample(g, quartic(1).value).sampled_only();
    std::vector<double> rh, rq;
    for (double rr : {0.5, 0.25, 0.125}) {
        rh.push_back(bmo_residual(hs, Cylinder{Point{}, rr}));
        rq.push_back(bmo_residual(qu, Cylinder{Point{}, rr}));
    }
    const double mean = (rh[0] + rh[1] + rh[2]) / 3;
    const double spread = (*std::max_element(rh.begin(), rh.end()) - *std::min_element(rh.begin(), rh.end())) / mean;
    const double o1 = std::log2(rq[0] / rq[1]), o2 = std::log2(rq[1] / rq[2]);
    r.passed = spread <= kBmoSpread && std::min(o1, o2) >= kBmoOrder;
    r.detail = "half-space rho " + f4(rh[0]) + " " + f4(rh[1]) + " " + f4(rh[2]) + " spread " + f4(spread) +
               " (<= 0.02); x^4 orders " + f4(o1) + " " + f4(o2) + " (>= 0.9)";
    return r;
}

// 5 split and telescope reconstruction on every solved scenario.
CriterionResult c5(Suite& suite) {
    CriterionResult r{5, "decomposition identity", true, ""};
    double split = 0, tel = 0;
    bool conv = true;
    for (const Case* c : suite.all()) {
        conv = conv && c->s.converged;
        const SplitResult s = split_w_g(c->s.u, c->p.f, c->s.source_fraction, 0.5, c->center);
        split = std::max(split, s.residual);
        const TelescopeResult t = dyadic_telescope(s.g_r, Point{}, 2);
        for (double v : t.residual) tel = std::max(tel, v);
    }
    r.passed = conv && split <= 10 * kSolverTol && tel <= 10 * kSolverTol;
    r.detail = "5 scenarios converged: " + std::string(conv ? "yes" : "no") + "; split residual " + e3(split) +
               ", telescope residual " + e3(tel) + " (<= 1e-9)";
    return r;
}

// 6 key inequality chain with slack 5 (h + k).
CriterionResult c6(Suite& suite) {
    CriterionResult r{6, "key-inequality chain", true, ""};
    int audited = 0, vacuous = 0;
    double worst = 0;
    bool holds = true;
    for (const Case* c : suite.all()) {
        const double slack = 5 * (c->g.h() + c->g.k());
        for (double rr : {0.5, 0.25}) {
            const KeyInequalityReport k =
                key_inequality_audit(c->s.u, c->p.f, c->s.source_fraction, c->s.coincidence, rr, c->center, slack);
            if (k.vacuous) {
                ++vacuous;
                continue;
            }
            ++audited;
            holds = holds && k.holds;
            worst = std::max(worst, k.ratio / (1 + slack));
        }
    }
    r.passed = holds && audited > 0;
    r.detail = std::to_string(audited) + " audits (" + std::to_string(vacuous) + " vacuous), max LHS/(RHS(1+5(h+k))) " +
               f4(worst) + " (<= 1)";
    return r;
}

// 7 Weiss energies of the two reference profiles.
CriterionResult c7() {
    CriterionResult r{7, "Weiss reference energies", true, ""};
    std::array<std::array<double, kMaxDim>, kMaxDim> M{};
    M[0][0] = 1;
    double dev = 0, ratio_dev = 0;
    std::string vals;
    for (int n : {1, 2}) {
        const double wp = weiss_energy(polynomial(n, M, 1.0), Point{}, 1.0);
        const double wh = weiss_energy(halfspace(n), Point{}, 1.0);
        dev = std::max({dev, std::abs(wp - 0.5), std::abs(wh - 0.25)});
        ratio_dev = std::max(ratio_dev, std::abs(wh / wp - 0.5));
        vals += " n=" + std::to_string(n) + ": " + fmt("%.9f", wp) + " " + fmt("%.9f", wh) + ";";
    }
    r.passed = dev <= kWeissExact && ratio_dev <= kRatioTol;
    r.detail = "W(1/2 x1^2), W(1/2 (x1)+^2):" + vals + " max deviation " + e3(dev) + " (<= 1e-6), ratio deviation " +
               e3(ratio_dev) + " (<= 0.005)";
    return r;
}

// 8 W(r) non-decreasing for f = 1 scenarios.
CriterionResult c8(Suite& suite) {
    CriterionResult r{8, "Weiss monotonicity", true, ""};
    const std::vector<double> radii = dyadic_radii(0.25, 6);
    double worst = 0;
    bool mono = true;
    std::string detail;
    auto check = [&](const std::string& label, const ScalarField& u, const ScalarField& f, const Point& X0) {
        const WeissCurve wc = weiss_curve(u, f, X0, radii);
        mono = mono && wc.monotone;
        worst = std::max(worst, wc.worst_drop);
        detail += label + " W(1/4) " + f4(wc.curve.values.front()) + " W(1/128) " + f4(wc.curve.values.back()) + "; ";
    };
    for (const Case* c : {&suite.half1(), &suite.off1(), &suite.half2()}) check(c->label, c->s.u, c->p.f, c->center);
    std::array<std::array<double, kMaxDim>, kMaxDim> M{};
    M[0][0] = 1;
    const SpaceTimeGrid g = make_grid(1, 1.25, 1.0 / 64, 1.25, 4.0 / 4096);
    check("polynomial n=1", ScalarField::sample(g, polynomial(1, M, 1.0).value).sampled_only(), ScalarField::constant(g, 1.0),
          Point{});
    r.passed = mono;
    r.detail = detail + "largest drop " + e3(worst) + " (<= 1e-3)";
    return r;
}

// 9 classification on two grids.
CriterionResult c9() {
    CriterionResult r{9, "energy classification", true, ""};
    std::array<std::array<double, kMaxDim>, kMaxDim> M{};
    M[0][0] = 1;
    const std::vector<double> radii = dyadic_radii(0.25, 6);
    std::string detail;
    bool ok = true;
    for (double h : {1.0 / 64, 1.0 / 128}) {
        const SpaceTimeGrid g = make_grid(1, 1.25, h, 1.25, 4 * h * h);
        for (int which = 0; which < 2; ++which) {
            const ExactProfile e = which == 0 ? halfspace(1) : polynomial(1, M, 1.0);
            const ObstacleProblem p = problem_from_exact(g, e, Cylinder{Point{}, 1.0});
            const ObstacleSolution s = solve_no_sign(p);
            const EnergyClass ec = classify_point(s.u, p.f, Point{}, radii);
            const EnergyKind want = which == 0 ? EnergyKind::Low : EnergyKind::High;
            ok = ok && s.converged && ec.kind == want;
            detail += std::string(which == 0 ? "half-space" : "polynomial") + " h=1/" + std::to_string(static_cast<int>(1 / h)) +
                      " " + to_string(ec.kind) + " (W0 " + f4(ec.w0) + "); ";
        }
    }
    r.passed = ok;
    r.detail = detail + "expected LowEnergy / HighEnergy on both grids";
    return r;
}

// 10 blow-up distance: zero when aligned, linear in the angular resolution when rotated.
CriterionResult c10(Suite& suite) {
    CriterionResult r{10, "blow-up distance", true, ""};
    const double d1 = blowup_distance(suite.half1().s.u, suite.half1().center, 0.25, 0, 0.0).distance;
    const double d2 = blowup_distance(suite.half2().s.u, suite.half2().center, 0.25, 64, 0.0).distance;
    const double th = 2 * std::numbers::pi / 3;
    const SpaceTimeGrid g = make_grid(2, 1.25, 1.0 / 32, 1.25, 4.0 / 1024);
    const ScalarField u = ScalarField::sample(g, halfspace(2, {std::cos(th), std::sin(th)}).value).sampled_only();
    std::vector<double> d;
    for (int K : {8, 16, 32, 64}) d.push_back(blowup_distance(u, Point{}, 0.5, K, 0.0).distance);
    double lo = INFINITY, hi = -INFINITY;
    std::string ds;
    for (std::size_t i = 0; i + 1 < d.size(); ++i) {
        const double s = std::log2(d[i] / d[i + 1]);
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    for (double v : d) ds += " " + e3(v);
    r.passed = d1 <= kBlowupAligned && d2 <= kBlowupAligned && lo >= kBlowupSlopeLo && hi <= kBlowupSlopeHi;
    r.detail = "aligned n=1 " + e3(d1) + ", n=2 " + e3(d2) + " (<= 1e-12); rotated K=8..64:" + ds + " slopes in [" +
               f4(lo) + ", " + f4(hi) + "] (within [0.9, 1.1])";
    return r;
}

// 11 density of the half-space and the synthetic geometric Lambda.
CriterionResult c11(Suite& suite) {
    CriterionResult r{11, "density and decay", true, ""};
    double worst = 0;   // max |lambda - 1/2| / (2h/r)
    for (const Case* c : {&suite.half1(), &suite.half2()}) {
        std::vector<double> radii;
        for (double rr = 0.5; rr >= 4 * c->g.h(); rr /= 2) radii.push_back(rr);
        const DiagnosticCurve lc = density_curve(c->g, c->s.coincidence, c->center, radii);
        for (std::size_t i = 0; i < lc.size(); ++i)
            worst = std::max(worst, std::abs(lc.values[i] - 0.5) / (2 * c->g.h() / lc.radii[i]));
    }

    const SpaceTimeGrid g = make_grid(2, 1.25, 1.0 / 32, 1.25, 4.0 / 1024);
    const int J = 3;
    const NodeMask lam = geometric_lambda(g, Point{}, J, env_seed());
    const CoincidenceSet cs{lam, cylinder_mask(g, Cylinder{Point{}, 1.0}), 0.0};
    const DiagnosticCurve lc = density_curve(g, cs, Point{}, dyadic_radii(1.0, J + 1));
    const std::vector<bool> flags = decay_flags(lc, g.h());
    const bool all_flags = std::all_of(flags.begin(), flags.end(), [](bool b) { return b; });
    std::vector<double> src(g.size(), 0.0);
    for (auto idx : lam.indices()) src[idx] = -1.0;
    const ScalarField gf = solve_dirichlet({Cylinder{Point{}, 1.0}, ScalarField(g, std::move(src)), ScalarField::zeros(g)});
    const TelescopeResult t = dyadic_telescope(gf, Point{}, J);
    const double sup = *std::max_element(t.projection_sup.begin(), t.projection_sup.end());
    std::string lam_s, sup_s;
    for (double v : lc.values) lam_s += " " + f4(v);
    for (double v : t.projection_sup) sup_s += " " + f4(v);
    r.passed = worst <= 1.0 && all_flags && sup <= kTelescopeSupBound;
    r.detail = "half-space max |lambda - 1/2| / (2h/r) " + f4(worst) + " (<= 1); geometric lambda" + lam_s +
               ", decay flags all set: " + (all_flags ? "yes" : "no") + ", telescope projection sups" + sup_s +
               " max " + f4(sup) + " (<= 0.75)";
    return r;
}

// 12 quadratic growth and the Euler operator on 2-homogeneous profiles.
CriterionResult c12(Suite& suite) {
    CriterionResult r{12, "growth and Euler operator", true, ""};
    double growth = 0;
    for (const Case* c : {&suite.half1(), &suite.half2()}) {
        std::vector<double> radii;
        for (double rr = 0.5; rr >= 4 * c->g.h(); rr /= 2) radii.push_back(rr);
        const DiagnosticCurve mc = quadratic_growth_curve(c->s.u, c->center, radii);
        for (double v : mc.values) growth = std::max(growth, std::abs(v - 0.5) / 0.5);
    }
    double euler = 0;
    std::array<std::array<double, kMaxDim>, kMaxDim> M{};
    M[0][0] = 0.75;
    M[0][1] = M[1][0] = -0.3;
    M[1][1] = 0.4;
    for (int n : {1, 2}) {
        const SpaceTimeGrid g = n == 1 ? make_grid(1, 1.25, 1.0 / 64, 1.25, 4.0 / 4096) : make_grid(2, 1.25, 1.0 / 32, 1.25, 4.0 / 1024);
        for (const ExactProfile& e : {halfspace(n), polynomial(n, M, 1.0), polynomial(n, M, -2.0)}) {
            const ScalarField u = ScalarField::sample(g, e.value).sampled_only();
            const NodeMask mask = cylinder_mask(g, Cylinder{Point{}, 1.0});
            for (auto idx : mask.indices()) {
                const NodeIndex a = g.unflat(idx);
                if (has_stencil(g, a)) euler = std::max(euler, std::abs(euler_operator(u, a)));
            }
        }
    }
    r.passed = growth <= kGrowthTol && euler <= kEulerExact;
    r.detail = "M_r relative deviation from 1/2 " + e3(growth) + " (<= 0.02); max |L u| on 2-homogeneous profiles " +
               e3(euler) + " (<= 1e-10)";
    return r;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const std::vector<int>& which) {
    Suite suite;
    std::vector<CriterionResult> out;
    for (int id = 1; id <= kCriterionCount; ++id) {
        if (!which.empty() && std::find(which.begin(), which.end(), id) == which.end()) continue;
        try {
            switch (id) {
                case 1: out.push_back(c1()); break;
                case 2: out.push_back(c2()); break;
                case 3: out.push_back(c3()); break;
                case 4: out.push_back(c4()); break;
                case 5: out.push_back(c5(suite)); break;
                case 6: out.push_back(c6(suite)); break;
                case 7: out.push_back(c7()); break;
                case 8: out.push_back(c8(suite)); break;
                case 9: out.push_back(c9()); break;
                case 10: out.push_back(c10(suite)); break;
                case 11: out.push_back(c11(suite)); break;
                case 12: out.push_back(c12(suite)); break;
            }
        } catch (const std::exception& e) {
            out.push_back({id, "criterion " + std::to_string(id), false, std::string("error: ") + e.what()});
        }
    }
    return out;
}

std::string format_result(const CriterionResult& r) {
    char head[32];
    std::snprintf(head, sizeof head, "criterion %2d  %s  ", r.id, r.passed ? "PASS" : "FAIL");
    return head + r.name + ": " + r.detail;
}

}  // namespace parobst
