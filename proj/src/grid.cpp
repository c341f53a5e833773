#include "parobst/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace parobst {

namespace {

int integral_ratio(double num, double den, const char* what) {
    const double q = num / den;
    const double r = std::round(q);
    if (std::abs(q - r) > 1e-9 * std::max(1.0, std::abs(q))) {
        std::ostringstream os;
        os << what << " is not an integer multiple of its spacing (ratio " << q << ")";
        throw DomainError(os.str());
    }
    return static_cast<int>(r);
}

}  // namespace

SpaceTimeGrid make_grid(int n, double R, double h, double T, double k) {
    if (n < 1 || n > kMaxDim) throw DomainError("grid dimension must be 1 or 2");
    if (!(h > 0) || !(k > 0)) throw DomainError("grid spacings h and k must be positive");
    if (!(R > 0) || !(T > 0)) throw DomainError("grid extents R and T must be positive");
    const int half = integral_ratio(R, h, "R");
    const int levels = integral_ratio(T, k, "T");
    if (2 * half + 1 < 9) throw DomainError("grid needs at least 9 spatial nodes per axis (R >= 4h)");
    if (levels < 4) throw DomainError("grid needs T >= 4k");

    SpaceTimeGrid g;
    g.n_ = n;
    g.R_ = R;
    g.h_ = h;
    g.T_ = T;
    g.k_ = k;
    g.nx_ = 2 * half + 1;
    g.nt_ = levels + 1;
    g.nspace_ = n == 1 ? static_cast<std::size_t>(g.nx_)
                       : static_cast<std::size_t>(g.nx_) * static_cast<std::size_t>(g.nx_);
    return g;
}

std::size_t SpaceTimeGrid::flat(const NodeIndex& a) const {
    std::size_t s = static_cast<std::size_t>(a.i[0]);
    if (n_ == 2) s += static_cast<std::size_t>(a.i[1]) * static_cast<std::size_t>(nx_);
    return static_cast<std::size_t>(a.level) * nspace_ + s;
}

NodeIndex SpaceTimeGrid::unflat(std::size_t idx) const {
    NodeIndex a;
    a.level = static_cast<int>(idx / nspace_);
    std::size_t s = idx % nspace_;
    a.i[0] = static_cast<int>(s % static_cast<std::size_t>(nx_));
    if (n_ == 2) a.i[1] = static_cast<int>(s / static_cast<std::size_t>(nx_));
    return a;
}

Point SpaceTimeGrid::point(const NodeIndex& a) const {
    Point p;
    for (int d = 0; d < n_; ++d) p.x[d] = coord(a.i[d]);
    p.t = time(a.level);
    return p;
}

bool SpaceTimeGrid::in_space(const std::array<int, kMaxDim>& i) const {
    for (int d = 0; d < n_; ++d)
        if (i[d] < 0 || i[d] >= nx_) return false;
    return true;
}

int SpaceTimeGrid::level_at(double t) const {
    const double q = t / k_ + (nt_ - 1);
    const double r = std::round(q);
    if (std::abs(q - r) > 1e-9 || r < 0 || r > nt_ - 1) {
        std::ostringstream os;
        os << "time " << t << " is not a grid time level";
        throw DomainError(os.str());
    }
    return static_cast<int>(r);
}

NodeIndex SpaceTimeGrid::node_at(const Point& p) const {
    NodeIndex a;
    for (int d = 0; d < n_; ++d) {
        const double q = p.x[d] / h_ + center_index();
        const double r = std::round(q);
        if (std::abs(q - r) > 1e-9 || r < 0 || r > nx_ - 1) {
            std::ostringstream os;
            os << "coordinate " << p.x[d] << " is not a grid node";
            throw DomainError(os.str());
        }
        a.i[d] = static_cast<int>(r);
    }
    a.level = level_at(p.t);
    return a;
}

NodeMask::NodeMask(std::vector<std::size_t> idx) : idx_(std::move(idx)) {
    std::sort(idx_.begin(), idx_.end());
    idx_.erase(std::unique(idx_.begin(), idx_.end()), idx_.end());
}

bool NodeMask::contains(std::size_t flat) const {
    return std::binary_search(idx_.begin(), idx_.end(), flat);
}

NodeMask NodeMask::intersect(const NodeMask& other) const {
    std::vector<std::size_t> out;
    std::set_intersection(idx_.begin(), idx_.end(), other.idx_.begin(), other.idx_.end(),
                          std::back_inserter(out));
    return NodeMask(std::move(out));
}

bool NodeMask::subset_of(const NodeMask& other) const {
    return std::includes(other.idx_.begin(), other.idx_.end(), idx_.begin(), idx_.end());
}

namespace {

// Radius and depth of Q expressed in index units.
struct IndexCylinder {
    NodeIndex center;
    double rho = 0;   // r / h
    double tau = 0;   // r^2 / k
};

IndexCylinder to_index(const SpaceTimeGrid& g, const Cylinder& q) {
    if (!(q.radius > 0)) throw DomainError("cylinder radius must be positive");
    IndexCylinder ic;
    ic.center = g.node_at(q.center);
    ic.rho = q.radius / g.h();
    ic.tau = q.radius * q.radius / g.k();
    return ic;
}

bool in_ball(const SpaceTimeGrid& g, const IndexCylinder& ic, const std::array<int, kMaxDim>& i) {
    double s = 0;
    for (int d = 0; d < g.dim(); ++d) {
        const double di = i[d] - ic.center.i[d];
        s += di * di;
    }
    return s <= ic.rho * ic.rho * (1 + 1e-12) + 1e-9;
}

template <class F>
void for_each_space(const SpaceTimeGrid& g, F&& f) {
    const int ny = g.dim() == 2 ? g.nx() : 1;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < g.nx(); ++i) f(std::array<int, kMaxDim>{i, j});
}

}  // namespace

void check_fits(const SpaceTimeGrid& g, const Cylinder& q) {
    const IndexCylinder ic = to_index(g, q);
    for (int d = 0; d < g.dim(); ++d) {
        if (ic.center.i[d] - ic.rho < -1e-9 || ic.center.i[d] + ic.rho > g.nx() - 1 + 1e-9) {
            std::ostringstream os;
            os << "cylinder of radius " << q.radius << " leaves the spatial grid along axis " << d;
            throw DomainError(os.str());
        }
    }
    if (ic.center.level - ic.tau < -1e-9) {
        std::ostringstream os;
        os << "cylinder of radius " << q.radius << " reaches below t = -T";
        throw DomainError(os.str());
    }
}

NodeMask cylinder_mask(const SpaceTimeGrid& g, const Cylinder& q) {
    check_fits(g, q);
    const IndexCylinder ic = to_index(g, q);
    const int lmin = static_cast<int>(std::floor(ic.center.level - ic.tau + 1e-9)) + 1;
    std::vector<std::size_t> idx;
    for (int l = std::max(lmin, 0); l <= ic.center.level; ++l) {
        for_each_space(g, [&](const std::array<int, kMaxDim>& i) {
            if (in_ball(g, ic, i)) idx.push_back(g.flat(NodeIndex{i, l}));
        });
    }
    return NodeMask(std::move(idx));
}

CylinderDomain cylinder_domain(const SpaceTimeGrid& g, const Cylinder& q) {
    check_fits(g, q);
    const IndexCylinder ic = to_index(g, q);
    CylinderDomain dom;
    dom.top_level = ic.center.level;
    dom.bottom_level = std::max(0, static_cast<int>(std::floor(ic.center.level - ic.tau + 1e-9)));

    std::vector<std::array<int, kMaxDim>> ball;
    std::vector<char> on_shell;
    for_each_space(g, [&](const std::array<int, kMaxDim>& i) {
        if (!in_ball(g, ic, i)) return;
        bool shell = false;
        for (int d = 0; d < g.dim() && !shell; ++d) {
            for (int s : {-1, 1}) {
                auto j = i;
                j[d] += s;
                if (!g.in_space(j) || !in_ball(g, ic, j)) shell = true;
            }
        }
        ball.push_back(i);
        on_shell.push_back(shell ? 1 : 0);
    });

    std::vector<std::size_t> all, interior, lateral, bottom;
    for (const auto& i : ball) bottom.push_back(g.flat(NodeIndex{i, dom.bottom_level}));
    for (int l = dom.bottom_level; l <= dom.top_level; ++l) {
        for (std::size_t b = 0; b < ball.size(); ++b) {
            const std::size_t idx = g.flat(NodeIndex{ball[b], l});
            all.push_back(idx);
            if (l == dom.bottom_level) continue;
            (on_shell[b] ? lateral : interior).push_back(idx);
        }
    }
    dom.all = NodeMask(std::move(all));
    dom.interior = NodeMask(std::move(interior));
    dom.lateral = NodeMask(std::move(lateral));
    dom.bottom = NodeMask(std::move(bottom));
    return dom;
}

ScalarField::ScalarField(SpaceTimeGrid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw DomainError("field size does not match grid");
}

ScalarField ScalarField::sample(const SpaceTimeGrid& grid, Evaluator exact) {
    std::vector<double> v(grid.size());
    for (std::size_t idx = 0; idx < v.size(); ++idx) v[idx] = exact(grid.point(grid.unflat(idx)));
    ScalarField f(grid, std::move(v));
    f.exact_ = std::move(exact);
    return f;
}

ScalarField ScalarField::zeros(const SpaceTimeGrid& grid) { return constant(grid, 0.0); }

ScalarField ScalarField::constant(const SpaceTimeGrid& grid, double c) {
    return sample(grid, [c](const Point&) { return c; });
}

ScalarField ScalarField::sampled_only() const { return ScalarField(grid_, values_); }

ScalarField ScalarField::axpby(double a, const ScalarField& other, double b) const {
    if (!(grid_ == other.grid_)) throw DomainError("fields live on different grids");
    std::vector<double> v(values_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a * values_[i] + b * other.values_[i];
    ScalarField out(grid_, std::move(v));
    if (exact_ && other.exact_) {
        out.exact_ = [e1 = exact_, e2 = other.exact_, a, b](const Point& p) {
            return a * e1(p) + b * e2(p);
        };
    }
    return out;
}

double TildeD2::trace() const {
    double s = 0;
    for (int d = 0; d < n; ++d) s += hess[d][d];
    return s;
}

double TildeD2::norm_sq() const {
    double s = dt * dt;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) s += hess[a][b] * hess[a][b];
    return s;
}

namespace {

[[noreturn]] void missing(const SpaceTimeGrid& g, const NodeIndex& at, const char* which) {
    std::ostringstream os;
    const Point p = g.point(at);
    os << "node (x=" << p.x[0];
    if (g.dim() == 2) os << ", " << p.x[1];
    os << ", t=" << p.t << ") has no " << which << " neighbour for the difference stencil";
    throw DomainError(os.str());
}

double value_shift(const ScalarField& u, const NodeIndex& at, int d0, int s0, int d1, int s1) {
    NodeIndex b = at;
    b.i[d0] += s0;
    if (d1 >= 0) b.i[d1] += s1;
    return u.at(b);
}

void require_space(const SpaceTimeGrid& g, const NodeIndex& at) {
    for (int d = 0; d < g.dim(); ++d) {
        if (at.i[d] - 1 < 0) missing(g, at, d == 0 ? "x1-minus" : "x2-minus");
        if (at.i[d] + 1 >= g.nx()) missing(g, at, d == 0 ? "x1-plus" : "x2-plus");
    }
}

}  // namespace

bool has_stencil(const SpaceTimeGrid& g, const NodeIndex& at) {
    for (int d = 0; d < g.dim(); ++d)
        if (at.i[d] < 1 || at.i[d] > g.nx() - 2) return false;
    return at.level >= 1 && at.level < g.nt();
}

double time_derivative(const ScalarField& u, const NodeIndex& at) {
    const auto& g = u.grid();
    if (at.level < 1) missing(g, at, "previous-time");
    NodeIndex prev = at;
    prev.level -= 1;
    return (u.at(at) - u.at(prev)) / g.k();
}

std::array<double, kMaxDim> gradient(const ScalarField& u, const NodeIndex& at) {
    const auto& g = u.grid();
    require_space(g, at);
    std::array<double, kMaxDim> out{0, 0};
    for (int d = 0; d < g.dim(); ++d)
        out[d] = (value_shift(u, at, d, 1, -1, 0) - value_shift(u, at, d, -1, -1, 0)) / (2 * g.h());
    return out;
}

TildeD2 tilde_d2(const ScalarField& u, const NodeIndex& at) {
    const auto& g = u.grid();
    require_space(g, at);
    TildeD2 r;
    r.n = g.dim();
    const double h2 = g.h() * g.h();
    const double c = u.at(at);
    for (int d = 0; d < g.dim(); ++d)
        r.hess[d][d] = (value_shift(u, at, d, 1, -1, 0) - 2 * c + value_shift(u, at, d, -1, -1, 0)) / h2;
    if (g.dim() == 2) {
        const double mixed = (value_shift(u, at, 0, 1, 1, 1) - value_shift(u, at, 0, 1, 1, -1) -
                              value_shift(u, at, 0, -1, 1, 1) + value_shift(u, at, 0, -1, 1, -1)) /
                             (4 * h2);
        r.hess[0][1] = r.hess[1][0] = mixed;
    }
    r.dt = time_derivative(u, at);
    return r;
}

double heat_operator(const ScalarField& u, const NodeIndex& at) { return tilde_d2(u, at).heat(); }

double cell_measure(const SpaceTimeGrid& g) { return std::pow(g.h(), g.dim()) * g.k(); }

double mean_over(const ScalarField& u, const NodeMask& mask) {
    if (mask.empty()) throw DomainError("mean over an empty node set");
    double s = 0;
    for (auto idx : mask.indices()) s += u[idx];
    return s / static_cast<double>(mask.count());
}

double mean_value(const ScalarField& u, const Cylinder& q) {
    return mean_over(u, cylinder_mask(u.grid(), q));
}

double l2_norm_on(const ScalarField& u, const NodeMask& mask) {
    if (mask.empty()) throw DomainError("norm over an empty node set");
    double s = 0;
    for (auto idx : mask.indices()) s += u[idx] * u[idx];
    return std::sqrt(s * cell_measure(u.grid()));
}

double l1_norm_on(const ScalarField& u, const NodeMask& mask) {
    if (mask.empty()) throw DomainError("norm over an empty node set");
    double s = 0;
    for (auto idx : mask.indices()) s += std::abs(u[idx]);
    return s * cell_measure(u.grid());
}

double sup_norm_on(const ScalarField& u, const NodeMask& mask) {
    double s = 0;
    for (auto idx : mask.indices()) s = std::max(s, std::abs(u[idx]));
    return s;
}

double gaussian_weight(std::span<const double> x, double t, int n) {
    if (!(t < 0)) throw DomainError("gaussian_weight requires t < 0");
    double r2 = 0;
    for (int d = 0; d < n; ++d) r2 += x[d] * x[d];
    const double s = -t;
    return std::pow(4 * std::numbers::pi * s, -0.5 * n) * std::exp(-r2 / (4 * s));
}

}  // namespace parobst
