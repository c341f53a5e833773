#include "parobst/heat_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "level_system.hpp"

namespace parobst {

namespace {

void require_same_grid(const ScalarField& a, const ScalarField& b, const char* what) {
    if (!(a.grid() == b.grid())) throw DomainError(std::string(what) + " lives on a different grid");
}

std::vector<double> gather(const ScalarField& u, const detail::LevelSystem& sys, int level) {
    const std::size_t base = static_cast<std::size_t>(level) * u.grid().nodes_per_level();
    std::vector<double> v(sys.size());
    for (std::size_t b = 0; b < sys.size(); ++b) v[b] = u[base + sys.offset(b)];
    return v;
}

}  // namespace

ScalarField solve_dirichlet(const DirichletProblem& p) {
    const SpaceTimeGrid& g = p.boundary.grid();
    require_same_grid(p.boundary, p.rhs, "right-hand side");
    const CylinderDomain dom = cylinder_domain(g, p.domain);
    for (auto idx : dom.bottom.indices())
        if (!std::isfinite(p.boundary[idx])) throw DomainError("boundary data missing on the bottom slice");
    for (auto idx : dom.lateral.indices())
        if (!std::isfinite(p.boundary[idx])) throw DomainError("boundary data missing on the lateral shell");
    for (auto idx : dom.interior.indices())
        if (!std::isfinite(p.rhs[idx])) throw DomainError("right-hand side not finite in the interior");

    auto sys = detail::LevelSystem::for_domain(g, dom);
    std::vector<double> out(g.size(), 0.0);
    std::vector<double> prev = gather(p.boundary, sys, dom.bottom_level);
    const std::size_t npl = g.nodes_per_level();
    for (std::size_t b = 0; b < sys.size(); ++b)
        out[static_cast<std::size_t>(dom.bottom_level) * npl + sys.offset(b)] = prev[b];

    for (int l = dom.bottom_level + 1; l <= dom.top_level; ++l) {
        std::vector<double> cur = gather(p.boundary, sys, l);
        const std::vector<double> src = gather(p.rhs, sys, l);
        sys.step(cur, prev, src);
        const std::size_t base = static_cast<std::size_t>(l) * npl;
        for (std::size_t b = 0; b < sys.size(); ++b) out[base + sys.offset(b)] = cur[b];
        prev = std::move(cur);
    }
    return ScalarField(g, std::move(out));
}

ScalarField caloric_extension(const ScalarField& boundary, const Cylinder& domain) {
    return solve_dirichlet({domain, ScalarField::zeros(boundary.grid()).sampled_only(), boundary});
}

ScalarField kernel_convolution(const ScalarField& source) {
    const SpaceTimeGrid& g = source.grid();
    const int nx = g.nx();
    const int n = g.dim();
    const std::size_t npl = g.nodes_per_level();
    std::vector<double> out(g.size(), 0.0);

    // 1D kernel tables per time lag; the 2D kernel is their tensor product.
    std::vector<std::vector<double>> table(static_cast<std::size_t>(g.nt()));
    for (int lag = 1; lag < g.nt(); ++lag) {
        const double s = lag * g.k();
        const int width = std::min(nx - 1, static_cast<int>(std::ceil(10.0 * std::sqrt(2 * s) / g.h())));
        auto& w = table[static_cast<std::size_t>(lag)];
        w.resize(static_cast<std::size_t>(width) + 1);
        for (int d = 0; d <= width; ++d) {
            const double x = d * g.h();
            w[static_cast<std::size_t>(d)] = std::exp(-x * x / (4 * s)) / std::sqrt(4 * std::numbers::pi * s) * g.h();
        }
    }

    auto conv1 = [&](const double* in, double* res, int stride, int count_lines, int line_stride,
                     const std::vector<double>& w) {
        const int width = static_cast<int>(w.size()) - 1;
        for (int line = 0; line < count_lines; ++line) {
            const double* a = in + line * line_stride;
            double* r = res + line * line_stride;
            for (int i = 0; i < nx; ++i) {
                double acc = 0;
                const int lo = std::max(0, i - width), hi = std::min(nx - 1, i + width);
                for (int j = lo; j <= hi; ++j) acc += w[static_cast<std::size_t>(std::abs(i - j))] * a[j * stride];
                r[i * stride] = acc;
            }
        }
    };

    std::vector<double> tmp(npl), tmp2(npl);
    for (int m = 0; m < g.nt(); ++m) {
        const double* src = source.values().data() + static_cast<std::size_t>(m) * npl;
        bool nonzero = false;
        for (std::size_t s = 0; s < npl && !nonzero; ++s) nonzero = src[s] != 0.0;
        if (!nonzero) continue;
        for (int l = m + 1; l < g.nt(); ++l) {
            const auto& w = table[static_cast<std::size_t>(l - m)];
            if (n == 1) {
                conv1(src, tmp.data(), 1, 1, 0, w);
            } else {
                conv1(src, tmp2.data(), 1, nx, nx, w);       // along x1 for every x2 row
                conv1(tmp2.data(), tmp.data(), nx, nx, 1, w); // along x2 for every x1 column
            }
            double* dst = out.data() + static_cast<std::size_t>(l) * npl;
            for (std::size_t s = 0; s < npl; ++s) dst[s] += g.k() * tmp[s];
        }
    }
    return ScalarField(g, std::move(out));
}

double tilde_d2_l2(const ScalarField& u, const NodeMask& mask) {
    if (mask.empty()) throw DomainError("norm over an empty node set");
    double s = 0;
    for (auto idx : mask.indices()) s += tilde_d2(u, u.grid().unflat(idx)).norm_sq();
    return std::sqrt(s * cell_measure(u.grid()));
}

double tilde_d2_sup(const ScalarField& u, const NodeMask& mask) {
    double s = 0;
    for (auto idx : mask.indices()) s = std::max(s, std::sqrt(tilde_d2(u, u.grid().unflat(idx)).norm_sq()));
    return s;
}

double interior_derivative_ratio(const ScalarField& w, const Cylinder& q, const double caloric_tol) {
    const SpaceTimeGrid& g = w.grid();
    const NodeMask full = cylinder_mask(g, q);
    const NodeMask half = cylinder_mask(g, Cylinder{q.center, q.radius / 2});

    double dmax = 0, hmax = 0;
    for (auto idx : full.indices()) {
        const NodeIndex a = g.unflat(idx);
        if (!has_stencil(g, a)) continue;
        const TildeD2 d = tilde_d2(w, a);
        dmax = std::max(dmax, std::sqrt(d.norm_sq()));
        hmax = std::max(hmax, std::abs(d.heat()));
    }
    if (hmax > caloric_tol * std::max(dmax, 1e-300) && hmax > 1e-12) {
        std::ostringstream os;
        os << "field is not caloric on the cylinder (max |Hw| = " << hmax << ")";
        throw DomainError(os.str());
    }
    const double l1 = l1_norm_on(w, full);
    if (l1 == 0) throw DomainError("interior_derivative_ratio: field vanishes on the cylinder");
    return tilde_d2_sup(w, half) * q.radius * q.radius / l1;
}

ZeroBoundaryRatio zero_boundary_ratio(const ScalarField& w, const ScalarField& f, const Cylinder& q) {
    const CylinderDomain dom = cylinder_domain(w.grid(), q);
    const double d2 = tilde_d2_l2(w, dom.interior);
    const double fn = l2_norm_on(f, dom.interior);
    if (fn == 0) throw DomainError("zero_boundary_ratio: right-hand side vanishes");
    ZeroBoundaryRatio r;
    r.scale_free = d2 / fn;
    r.literal = r.scale_free / std::pow(q.radius, 0.5 * (w.grid().dim() + 2));
    return r;
}

}  // namespace parobst
