#include "parobst/weiss.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <sstream>

#include "parobst/seed.hpp"

namespace parobst {

void WeissQuadrature::validate() const {
    if (!(gamma > 0 && gamma < 1)) throw DomainError("Weiss quadrature: gamma must lie in (0,1)");
    if (levels < 16) throw DomainError("Weiss quadrature: at least 16 time panels required");
    if (!(nu >= 6)) throw DomainError("Weiss quadrature: truncation multiplier nu must be >= 6");
    if (order < 1 || hermite < 2 || space_order < 1) throw DomainError("Weiss quadrature: bad rule order");
    if (!(cutoff > 0)) throw DomainError("Weiss quadrature: cutoff radius must be positive");
}

namespace {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights mu0 * v0^2.
GaussRule golub_welsch(int order, double mu0, double (*beta)(int)) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(order, order);
    for (int i = 1; i < order; ++i) J(i, i - 1) = J(i - 1, i) = beta(i);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    GaussRule r;
    for (int i = 0; i < order; ++i) {
        r.x.push_back(es.eigenvalues()(i));
        const double v = es.eigenvectors()(0, i);
        r.w.push_back(mu0 * v * v);
    }
    // Symmetrize so that mirrored nodes carry identical weights.
    for (int i = 0; i < order / 2; ++i) {
        const int j = order - 1 - i;
        const double x = 0.5 * (r.x[static_cast<std::size_t>(j)] - r.x[static_cast<std::size_t>(i)]);
        const double w = 0.5 * (r.w[static_cast<std::size_t>(i)] + r.w[static_cast<std::size_t>(j)]);
        r.x[static_cast<std::size_t>(i)] = -x;
        r.x[static_cast<std::size_t>(j)] = x;
        r.w[static_cast<std::size_t>(i)] = r.w[static_cast<std::size_t>(j)] = w;
    }
    if (order % 2 == 1) r.x[static_cast<std::size_t>(order / 2)] = 0.0;
    return r;
}

double legendre_beta(int k) { return k / std::sqrt(4.0 * k * k - 1.0); }
double hermite_beta(int k) { return std::sqrt(0.5 * k); }

double sq(double v) { return v * v; }

}  // namespace

GaussRule gauss_legendre(int order) {
    if (order < 1) throw DomainError("Gauss-Legendre order must be >= 1");
    if (order == 1) return {{0.0}, {2.0}};
    return golub_welsch(order, 2.0, legendre_beta);
}

GaussRule gauss_hermite(int order) {
    if (order < 1) throw DomainError("Gauss-Hermite order must be >= 1");
    if (order == 1) return {{0.0}, {std::sqrt(std::numbers::pi)}};
    return golub_welsch(order, std::sqrt(std::numbers::pi), hermite_beta);
}

double cutoff_psi(double rho) {
    if (rho <= 0.5) return 1.0;
    if (rho >= 0.75) return 0.0;
    const double z = (0.75 - rho) * 4.0;
    return z * z * z * (10.0 + z * (-15.0 + 6.0 * z));
}

double cutoff_psi_derivative(double rho) {
    if (rho <= 0.5 || rho >= 0.75) return 0.0;
    const double z = (0.75 - rho) * 4.0;
    return -4.0 * 30.0 * z * z * (1.0 - z) * (1.0 - z);
}

namespace {

// Sum over geometric time panels of slice(s) * ds; returns the total and the
// contribution of the last panel.
template <class Slice>
std::pair<double, double> time_integral(double r, const WeissQuadrature& quad, Slice&& slice) {
    const GaussRule gl = gauss_legendre(quad.order);
    double total = 0, last = 0;
    double b = r * r;
    for (int q = 0; q < quad.levels; ++q) {
        const double a = b * quad.gamma;
        double panel = 0;
        for (std::size_t i = 0; i < gl.x.size(); ++i) {
            const double s = 0.5 * (a + b) + 0.5 * (b - a) * gl.x[i];
            panel += 0.5 * (b - a) * gl.w[i] * slice(s);
        }
        total += panel;
        last = panel;
        b = a;
    }
    return {total, last};
}

double finish(double r, const WeissQuadrature& quad, std::pair<double, double> tl) {
    const double r4 = std::pow(r, 4);
    const double W = tl.first / r4;
    const double g2 = quad.gamma * quad.gamma;
    const double tail = std::abs(tl.second) / r4 * g2 / (1 - g2);
    if (!(tail <= quad.tail_tol * std::max(1.0, std::abs(W)))) {
        std::ostringstream os;
        os << "weiss_energy: time-tail estimate " << tail << " exceeds tolerance " << quad.tail_tol
           << " (field does not vanish at the center)";
        throw DomainError(os.str());
    }
    return W;
}

}  // namespace

double weiss_energy(const ExactProfile& v, const Point& center, double r, const WeissQuadrature& quad) {
    if (!(r > 0)) throw DomainError("weiss_energy: radius must be positive");
    quad.validate();
    const int n = v.n;
    const GaussRule gh = gauss_hermite(quad.hermite);
    const double norm = std::pow(std::numbers::pi, -0.5 * n);
    auto slice = [&](double s) {
        const double scale = 2.0 * std::sqrt(s);
        double acc = 0;
        const std::size_t ny = n == 2 ? gh.x.size() : 1;
        for (std::size_t j = 0; j < ny; ++j) {
            for (std::size_t i = 0; i < gh.x.size(); ++i) {
                Point p = center;
                p.x[0] += scale * gh.x[i];
                double w = gh.w[i];
                if (n == 2) {
                    p.x[1] += scale * gh.x[j];
                    w *= gh.w[j];
                }
                p.t = center.t - s;
                const double val = v.value(p);
                const Vec gr = v.grad(p);
                double g2 = 0;
                for (int d = 0; d < n; ++d) g2 += gr[d] * gr[d];
                acc += w * (g2 + 2.0 * v.rhs(p) * val - val * val / s);
            }
        }
        return norm * acc;
    };
    return finish(r, quad, time_integral(r, quad, slice));
}

namespace {

struct AxisPoint {
    double x;        // offset from the center
    double w;
    int block;       // block j covers center index + [2j, 2j+2]
    double L[3];
    double dL[3];
};

std::vector<AxisPoint> axis_points(double L, double h, double sigma, const GaussRule& gl) {
    std::vector<AxisPoint> pts;
    const int jlo = static_cast<int>(std::floor(-L / (2 * h)));
    const int jhi = static_cast<int>(std::ceil(L / (2 * h))) - 1;
    for (int j = jlo; j <= jhi; ++j) {
        const double lo = std::max(2.0 * j * h, -L), hi = std::min(2.0 * (j + 1) * h, L);
        if (!(hi > lo)) continue;
        const int m = std::max(1, static_cast<int>(std::ceil((hi - lo) / (0.5 * sigma))));
        const double width = (hi - lo) / m;
        const double mid = (2.0 * j + 1) * h;
        for (int k = 0; k < m; ++k) {
            const double a = lo + k * width;
            for (std::size_t q = 0; q < gl.x.size(); ++q) {
                AxisPoint p;
                p.x = a + 0.5 * width * (1 + gl.x[q]);
                p.w = 0.5 * width * gl.w[q];
                p.block = j;
                const double z = (p.x - mid) / h;
                p.L[0] = 0.5 * z * (z - 1);
                p.L[1] = 1 - z * z;
                p.L[2] = 0.5 * z * (z + 1);
                p.dL[0] = (z - 0.5) / h;
                p.dL[1] = -2 * z / h;
                p.dL[2] = (z + 0.5) / h;
                pts.push_back(p);
            }
        }
    }
    return pts;
}

}  // namespace

double weiss_energy(const ScalarField& v, const ScalarField& f, const Point& center, double r,
                    const WeissQuadrature& quad) {
    if (!(r > 0)) throw DomainError("weiss_energy: radius must be positive");
    quad.validate();
    const SpaceTimeGrid& g = v.grid();
    if (!(f.grid() == g)) throw DomainError("weiss_energy: f lives on a different grid");
    const int n = g.dim();
    const double h = g.h();
    const NodeIndex c = g.node_at(center);
    if (r * r > c.level * g.k() * (1 + 1e-12)) throw DomainError("weiss_energy: cylinder reaches below the grid");
    const double support = 0.75 * quad.cutoff;
    const int reach = 2 * static_cast<int>(std::ceil(support / (2 * h) - 1e-12));
    for (int d = 0; d < n; ++d)
        if (c.i[d] - reach < 0 || c.i[d] + reach > g.nx() - 1)
            throw DomainError("weiss_energy: cutoff support leaves the grid");

    const GaussRule gl = gauss_legendre(quad.space_order);
    const std::size_t npl = g.nodes_per_level();

    auto slice = [&](double s) {
        const double t = center.t - s;
        double pos = (t + g.depth()) / g.k();
        int l = static_cast<int>(std::floor(pos));
        if (l >= g.nt() - 1) l = g.nt() - 2;
        const double th = pos - l;
        const double* v0 = v.values().data() + static_cast<std::size_t>(l) * npl;
        const double* v1 = v0 + npl;
        const double* f0 = f.values().data() + static_cast<std::size_t>(l) * npl;
        const double* f1 = f0 + npl;
        auto blend = [&](const double* a, const double* b, std::size_t idx) { return (1 - th) * a[idx] + th * b[idx]; };

        const double sigma = std::sqrt(2 * s);
        const double L = std::min(quad.nu * sigma, support);
        const auto pts = axis_points(L, h, sigma, gl);
        const double gnorm = std::pow(4 * std::numbers::pi * s, -0.5 * n);
        double acc = 0;

        auto integrand = [&](double xr2, const double* xr, double val, const double* grad, double fv) {
            const double rho = std::sqrt(xr2) / quad.cutoff;
            const double psi = cutoff_psi(rho);
            if (psi == 0.0) return 0.0;
            const double dpsi = cutoff_psi_derivative(rho);
            double g2 = 0;
            for (int d = 0; d < n; ++d) {
                double gp = 0;
                if (dpsi != 0.0) gp = dpsi * xr[d] / (std::sqrt(xr2) * quad.cutoff);
                g2 += sq(psi * grad[d] + val * gp);
            }
            const double V = psi * val;
            return (g2 + 2 * fv * V - V * V / s) * std::exp(-xr2 / (4 * s));
        };

        if (n == 1) {
            for (const auto& p : pts) {
                const int base = c.i[0] + 2 * p.block;
                double val = 0, grad = 0, fv = 0;
                for (int a = 0; a < 3; ++a) {
                    const auto idx = static_cast<std::size_t>(base + a);
                    const double va = blend(v0, v1, idx);
                    val += p.L[a] * va;
                    grad += p.dL[a] * va;
                    fv += p.L[a] * blend(f0, f1, idx);
                }
                const double xr[1] = {p.x};
                acc += p.w * integrand(p.x * p.x, xr, val, &grad, fv);
            }
        } else {
            const auto nx = static_cast<std::size_t>(g.nx());
            for (const auto& py : pts) {
                for (const auto& px : pts) {
                    const double xr2 = px.x * px.x + py.x * py.x;
                    if (xr2 >= sq(support)) continue;
                    const int bx = c.i[0] + 2 * px.block, by = c.i[1] + 2 * py.block;
                    double val = 0, gx = 0, gy = 0, fv = 0;
                    for (int b = 0; b < 3; ++b) {
                        for (int a = 0; a < 3; ++a) {
                            const std::size_t idx = static_cast<std::size_t>(by + b) * nx + static_cast<std::size_t>(bx + a);
                            const double va = blend(v0, v1, idx);
                            val += px.L[a] * py.L[b] * va;
                            gx += px.dL[a] * py.L[b] * va;
                            gy += px.L[a] * py.dL[b] * va;
                            fv += px.L[a] * py.L[b] * blend(f0, f1, idx);
                        }
                    }
                    const double xr[2] = {px.x, py.x};
                    const double grad[2] = {gx, gy};
                    acc += px.w * py.w * integrand(xr2, xr, val, grad, fv);
                }
            }
        }
        return gnorm * acc;
    };
    return finish(r, quad, time_integral(r, quad, slice));
}

double euler_operator(const ScalarField& v, const NodeIndex& at, const Point& center) {
    const SpaceTimeGrid& g = v.grid();
    const auto gr = gradient(v, at);
    const double vt = time_derivative(v, at);
    const Point p = g.point(at);
    double s = 2 * (p.t - center.t) * vt - 2 * v.at(at);
    for (int d = 0; d < g.dim(); ++d) s += (p.x[d] - center.x[d]) * gr[d];
    return s;
}

namespace {

WeissCurve verdict(DiagnosticCurve c, double tol) {
    WeissCurve w;
    std::vector<std::size_t> order(c.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return c.radii[a] < c.radii[b]; });
    for (std::size_t i = 1; i < order.size(); ++i) {
        const double drop = c.values[order[i - 1]] - c.values[order[i]];
        w.worst_drop = std::max(w.worst_drop, drop);
    }
    w.monotone = w.worst_drop <= tol;
    w.curve = std::move(c);
    return w;
}

}  // namespace

WeissCurve weiss_curve(const ScalarField& v, const ScalarField& f, const Point& center,
                       const std::vector<double>& radii, const WeissQuadrature& quad, double tol_mono) {
    DiagnosticCurve c;
    c.name = "weiss";
    for (double r : radii) c.push(r, weiss_energy(v, f, center, r, quad));
    return verdict(std::move(c), tol_mono);
}

WeissCurve weiss_curve(const ExactProfile& v, const Point& center, const std::vector<double>& radii,
                       const WeissQuadrature& quad, double tol_mono) {
    DiagnosticCurve c;
    c.name = "weiss";
    for (double r : radii) c.push(r, weiss_energy(v, center, r, quad));
    return verdict(std::move(c), tol_mono);
}

void check_dyadic_compatible(const SpaceTimeGrid& g, double r, bool time) {
    auto integral = [](double q) { return q >= 1 - 1e-9 && std::abs(q - std::round(q)) <= 1e-9 * std::max(1.0, q); };
    if (!(r > 0) || !integral(r / g.h()) || (time && !integral(r * r / g.k()))) {
        std::ostringstream os;
        os << "radius not dyadic-compatible: r = " << r << " (h = " << g.h() << ", k = " << g.k() << ")";
        throw DomainError(os.str());
    }
}

namespace {

struct RescaleMap {
    SpaceTimeGrid ng;
    NodeIndex c;
    int avail = 0;
};

RescaleMap rescale_map(const SpaceTimeGrid& g, double r, const Point& center) {
    check_dyadic_compatible(g, r, true);
    RescaleMap m;
    m.c = g.node_at(center);
    m.avail = g.nx();
    for (int d = 0; d < g.dim(); ++d) m.avail = std::min({m.avail, m.c.i[d], g.nx() - 1 - m.c.i[d]});
    m.ng = make_grid(g.dim(), m.avail * g.h() / r, g.h() / r, m.c.level * g.k() / (r * r), g.k() / (r * r));
    return m;
}

std::size_t old_index(const SpaceTimeGrid& g, const RescaleMap& m, std::size_t new_idx) {
    NodeIndex a = m.ng.unflat(new_idx);
    for (int d = 0; d < g.dim(); ++d) a.i[d] += m.c.i[d] - m.avail;
    return g.flat(a);
}

}  // namespace

ScalarField rescale(const ScalarField& u, double r, const Point& center, double power) {
    const SpaceTimeGrid& g = u.grid();
    const RescaleMap m = rescale_map(g, r, center);
    const double scale = std::pow(r, -power);
    std::vector<double> vals(m.ng.size());
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = u[old_index(g, m, i)] * scale;
    if (!u.has_exact()) return ScalarField(m.ng, std::move(vals));
    // Keep the remapped values and attach the rescaled evaluator.
    ScalarField res = ScalarField::sample(m.ng, [e = u.exact(), r, center, scale](const Point& p) {
        Point q;
        for (int d = 0; d < kMaxDim; ++d) q.x[d] = center.x[d] + r * p.x[d];
        q.t = center.t + r * r * p.t;
        return e(q) * scale;
    });
    std::copy(vals.begin(), vals.end(), res.values().begin());
    return res;
}

NodeMask rescale_mask(const SpaceTimeGrid& g, const NodeMask& mask, double r, const Point& center) {
    const RescaleMap m = rescale_map(g, r, center);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < m.ng.size(); ++i)
        if (mask.contains(old_index(g, m, i))) out.push_back(i);
    return NodeMask(std::move(out));
}

ExactProfile rescale(const ExactProfile& v, double r, const Point& center) {
    if (!(r > 0)) throw DomainError("rescale: radius must be positive");
    auto map = [r, center](const Point& p) {
        Point q;
        for (int d = 0; d < kMaxDim; ++d) q.x[d] = center.x[d] + r * p.x[d];
        q.t = center.t + r * r * p.t;
        return q;
    };
    ExactProfile o = v;
    o.value = [f = v.value, map, r](const Point& p) { return f(map(p)) / (r * r); };
    o.grad = [f = v.grad, map, r](const Point& p) {
        Vec g = f(map(p));
        return Vec{g[0] / r, g[1] / r};
    };
    o.rhs = [f = v.rhs, map](const Point& p) { return f(map(p)); };
    return o;
}

std::string to_string(EnergyKind k) {
    switch (k) {
        case EnergyKind::Zero: return "ZeroEnergy";
        case EnergyKind::Low: return "LowEnergy";
        case EnergyKind::High: return "HighEnergy";
        case EnergyKind::Indeterminate: break;
    }
    return "Indeterminate";
}

double reference_energy_halfspace(int n, const WeissQuadrature& quad) {
    return weiss_energy(halfspace(n), Point{}, 1.0, quad);
}

double reference_energy_polynomial(int n, const WeissQuadrature& quad) {
    std::array<std::array<double, kMaxDim>, kMaxDim> M{};
    M[0][0] = 1.0;
    return weiss_energy(polynomial(n, M, 1.0), Point{}, 1.0, quad);
}

EnergyClass classify_point(const ScalarField& u, const ScalarField& f, const Point& center,
                           const std::vector<double>& radii, const WeissQuadrature& quad) {
    EnergyClass ec;
    std::vector<double> reliable;
    for (double r : radii)
        if (r >= 2 * u.grid().h() * (1 - 1e-12)) reliable.push_back(r);
    std::sort(reliable.begin(), reliable.end(), std::greater<>());
    ec.curve = weiss_curve(u, f, center, reliable, quad).curve;
    if (reliable.size() < 3) {
        ec.warning = "fewer than 3 reliable radii (r >= 2h)";
        return ec;
    }
    const std::size_t m = reliable.size();
    const double w1 = ec.curve.values[m - 3], w2 = ec.curve.values[m - 2], w3 = ec.curve.values[m - 1];
    const double d1 = w2 - w1, d2 = w3 - w2, den = d2 - d1;
    double est = w3;
    if (std::abs(den) > 1e-14 && std::abs(d2) > 1e-14) {
        const double a = w3 - d2 * d2 / den;
        if (std::isfinite(a) && std::abs(a - w3) <= 10 * std::abs(d2)) est = a;
    }
    ec.w0 = est;

    const int n = u.grid().dim();
    const double wh = reference_energy_halfspace(n, quad);
    const double wp = reference_energy_polynomial(n, quad);
    const std::pair<EnergyKind, double> refs[] = {{EnergyKind::Zero, 0.0}, {EnergyKind::Low, wh}, {EnergyKind::High, wp}};
    std::size_t best = 0;
    for (std::size_t i = 1; i < 3; ++i)
        if (std::abs(est - refs[i].second) < std::abs(est - refs[best].second)) best = i;
    ec.reference = refs[best].second;
    ec.distance = std::abs(est - ec.reference);
    if (ec.distance <= 0.1 * std::max(std::abs(ec.reference), wh)) {
        ec.kind = refs[best].first;
        if (ec.kind == EnergyKind::Zero)
            ec.warning = "zero energy does not occur on the free boundary; the center is likely not a free boundary point";
    } else {
        ec.warning = "W(0+) estimate is not within 10% of any reference value";
    }
    return ec;
}

int default_direction_count(int n) { return n == 1 ? 2 : 64; }

std::vector<Vec> sample_directions(int n, int K, double phase) {
    std::vector<Vec> e;
    if (n == 1) return {Vec{1.0, 0.0}, Vec{-1.0, 0.0}};
    for (int k = 0; k < K; ++k) {
        const double th = 2 * std::numbers::pi * (k + phase) / K;
        e.push_back(Vec{std::cos(th), std::sin(th)});
    }
    return e;
}

BlowupDistance blowup_distance(const ScalarField& u, const Point& center, double r, int K, double phase) {
    const int n = u.grid().dim();
    if (K <= 0) K = default_direction_count(n);
    if (phase < 0) phase = seed_fraction(env_seed());
    const ScalarField ur = rescale(u, r, center);
    const SpaceTimeGrid& g = ur.grid();
    const NodeMask mask = cylinder_mask(g, Cylinder{Point{}, 1.0});
    std::vector<Point> pts;
    for (auto idx : mask.indices()) pts.push_back(g.point(g.unflat(idx)));
    BlowupDistance best;
    best.distance = std::numeric_limits<double>::infinity();
    for (const Vec& e : sample_directions(n, K, phase)) {
        double d = 0;
        std::size_t j = 0;
        for (auto idx : mask.indices()) {
            const Point& p = pts[j++];
            const double s = std::max(0.0, p.x[0] * e[0] + p.x[1] * e[1]);
            d = std::max(d, std::abs(ur[idx] - 0.5 * s * s));
        }
        if (d < best.distance) {
            best.distance = d;
            best.direction = e;
        }
    }
    return best;
}

MinimalDiameter minimal_diameter(const ScalarField& u, const Point& center, double r, double sigma,
                                 double tol_zero, int K, double phase) {
    const SpaceTimeGrid& g = u.grid();
    const int n = g.dim();
    if (K <= 0) K = default_direction_count(n);
    if (phase < 0) phase = seed_fraction(env_seed());
    g.node_at(center);   // throws unless the center is a node
    const int level = g.level_at(center.t - r * r);
    std::vector<Vec> cloud;
    const int ny = n == 2 ? g.nx() : 1;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            const NodeIndex a{{i, j}, level};
            const Point p = g.point(a);
            double d2 = 0;
            for (int d = 0; d < n; ++d) d2 += sq(p.x[d] - center.x[d]);
            if (d2 > r * r * (1 + 1e-12)) continue;
            if (std::abs(u.at(a)) <= tol_zero) cloud.push_back(Vec{p.x[0], p.x[1]});
        }
    }
    MinimalDiameter md;
    md.cloud = cloud.size();
    if (cloud.empty()) return md;
    std::vector<Vec> dirs;
    if (n == 1) {
        dirs.push_back(Vec{1.0, 0.0});
    } else {
        for (int k = 0; k < K; ++k) {
            const double th = std::numbers::pi * (k + phase) / K;
            dirs.push_back(Vec{std::cos(th), std::sin(th)});
        }
    }
    md.md = std::numeric_limits<double>::infinity();
    for (const Vec& e : dirs) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const Vec& p : cloud) {
            const double s = p[0] * e[0] + p[1] * e[1];
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
        md.md = std::min(md.md, hi - lo);
    }
    md.ratio = md.md / r;
    md.condition = md.ratio > sigma;
    return md;
}

}  // namespace parobst
