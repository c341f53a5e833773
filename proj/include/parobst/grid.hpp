#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace parobst {

/// Raised for inputs that violate a documented precondition.
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kMaxDim = 2;

/// A space-time point. Only the first `n` spatial coordinates are meaningful.
struct Point {
    std::array<double, kMaxDim> x{0.0, 0.0};
    double t = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

/// Integer node address: spatial indices relative to the lower corner and the
/// time level (0 is the bottom t = -T, nt-1 is t = 0).
struct NodeIndex {
    std::array<int, kMaxDim> i{0, 0};
    int level = 0;

    friend bool operator==(const NodeIndex&, const NodeIndex&) = default;
};

/// Uniform tensor grid on [-R,R]^n x [-T,0].
class SpaceTimeGrid {
public:
    SpaceTimeGrid() = default;

    int dim() const { return n_; }
    double half_width() const { return R_; }
    double h() const { return h_; }
    double depth() const { return T_; }
    double k() const { return k_; }

    int nx() const { return nx_; }      // nodes per spatial axis
    int nt() const { return nt_; }      // time levels
    int center_index() const { return (nx_ - 1) / 2; }
    std::size_t nodes_per_level() const { return nspace_; }
    std::size_t size() const { return nspace_ * static_cast<std::size_t>(nt_); }

    double coord(int i) const { return (i - center_index()) * h_; }
    double time(int level) const { return (level - (nt_ - 1)) * k_; }

    std::size_t flat(const NodeIndex& a) const;
    NodeIndex unflat(std::size_t idx) const;
    Point point(const NodeIndex& a) const;

    bool in_space(const std::array<int, kMaxDim>& i) const;

    /// Nearest node to a point; throws if the point is not a node (within 1e-9 h, 1e-9 k).
    NodeIndex node_at(const Point& p) const;
    /// Level of a time value; throws if it is not a grid time level.
    int level_at(double t) const;

    friend bool operator==(const SpaceTimeGrid& a, const SpaceTimeGrid& b) {
        return a.n_ == b.n_ && a.R_ == b.R_ && a.h_ == b.h_ && a.T_ == b.T_ && a.k_ == b.k_;
    }

private:
    friend SpaceTimeGrid make_grid(int, double, double, double, double);

    int n_ = 1;
    double R_ = 0, h_ = 0, T_ = 0, k_ = 0;
    int nx_ = 0, nt_ = 0;
    std::size_t nspace_ = 0;
};

/// Validates and builds a grid. R/h and T/k must be integers (to 1e-9).
SpaceTimeGrid make_grid(int n, double R, double h, double T, double k);

/// Backward cylinder Q_r^-(X0) = B_r(x0) x (t0 - r^2, t0].
struct Cylinder {
    Point center;
    double radius = 1.0;
};

/// Node set stored as a sorted list of flat indices.
class NodeMask {
public:
    NodeMask() = default;
    explicit NodeMask(std::vector<std::size_t> idx);

    std::span<const std::size_t> indices() const { return idx_; }
    std::size_t count() const { return idx_.size(); }
    bool empty() const { return idx_.empty(); }
    bool contains(std::size_t flat) const;

    NodeMask intersect(const NodeMask& other) const;
    bool subset_of(const NodeMask& other) const;

    friend bool operator==(const NodeMask&, const NodeMask&) = default;

private:
    std::vector<std::size_t> idx_;
};

/// Checks that Q fits in the grid (ball inside the box, bottom above -T) and
/// that its center is a node. Throws DomainError otherwise.
void check_fits(const SpaceTimeGrid& g, const Cylinder& q);

/// Membership: |x - x0| <= r and t0 - r^2 < t <= t0.
NodeMask cylinder_mask(const SpaceTimeGrid& g, const Cylinder& q);

/// Nodes of the closed solve domain of Q: the ball at every level from the
/// bottom slice (the last level at or below t0 - r^2) up to t0.
struct CylinderDomain {
    NodeMask all;
    NodeMask interior;   // parabolic interior
    NodeMask lateral;    // ball nodes with an axis neighbour outside the ball
    NodeMask bottom;     // full ball at the bottom level
    int bottom_level = 0;
    int top_level = 0;
};
CylinderDomain cylinder_domain(const SpaceTimeGrid& g, const Cylinder& q);

using Evaluator = std::function<double(const Point&)>;

/// Sampled space-time function, optionally backed by a closed form.
class ScalarField {
public:
    ScalarField() = default;
    ScalarField(SpaceTimeGrid grid, std::vector<double> values);
    /// Samples `exact` at every node and keeps it as evaluator.
    static ScalarField sample(const SpaceTimeGrid& grid, Evaluator exact);
    static ScalarField zeros(const SpaceTimeGrid& grid);
    static ScalarField constant(const SpaceTimeGrid& grid, double c);

    const SpaceTimeGrid& grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    double operator[](std::size_t flat) const { return values_[flat]; }
    double& operator[](std::size_t flat) { return values_[flat]; }
    double at(const NodeIndex& a) const { return values_[grid_.flat(a)]; }

    bool has_exact() const { return static_cast<bool>(exact_); }
    const Evaluator& exact() const { return exact_; }
    /// Drops the evaluator (the field becomes purely sampled).
    ScalarField sampled_only() const;

    /// a*this + b*other, evaluators combined when both exist.
    ScalarField axpby(double a, const ScalarField& other, double b) const;

private:
    SpaceTimeGrid grid_;
    std::vector<double> values_;
    Evaluator exact_;
};

/// Parabolic second derivative at a node: spatial Hessian (centered) and
/// backward time difference.
struct TildeD2 {
    std::array<std::array<double, kMaxDim>, kMaxDim> hess{};
    double dt = 0.0;
    int n = 1;

    double trace() const;
    double norm_sq() const;   // sum of squared Hessian entries + dt^2
    double heat() const { return trace() - dt; }   // H u = Laplacian - d/dt
};

/// Throws DomainError naming the missing neighbour when the stencil leaves the grid.
TildeD2 tilde_d2(const ScalarField& u, const NodeIndex& at);
/// Centered spatial gradient.
std::array<double, kMaxDim> gradient(const ScalarField& u, const NodeIndex& at);
/// Backward time difference.
double time_derivative(const ScalarField& u, const NodeIndex& at);
/// Discrete heat operator (Laplacian - backward time difference).
double heat_operator(const ScalarField& u, const NodeIndex& at);
bool has_stencil(const SpaceTimeGrid& g, const NodeIndex& at);

double mean_value(const ScalarField& u, const Cylinder& q);
double mean_over(const ScalarField& u, const NodeMask& mask);
/// sqrt(sum u^2 h^n k) over the mask.
double l2_norm_on(const ScalarField& u, const NodeMask& mask);
double l1_norm_on(const ScalarField& u, const NodeMask& mask);
double sup_norm_on(const ScalarField& u, const NodeMask& mask);
double cell_measure(const SpaceTimeGrid& g);

/// Backward heat kernel G(x, -t) = (4 pi (-t))^{-n/2} exp(-|x|^2 / (4(-t))), t < 0.
double gaussian_weight(std::span<const double> x, double t, int n);

}  // namespace parobst
