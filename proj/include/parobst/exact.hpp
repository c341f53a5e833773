#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "parobst/grid.hpp"

namespace parobst {

using Vec = std::array<double, kMaxDim>;

/// Closed-form solution of H u = f chi_{u != 0} together with its data.
struct ExactProfile {
    std::string tag;
    std::string params;   // canonical parameter string, round-trips through make_exact
    int n = 1;
    std::function<double(const Point&)> value;
    std::function<Vec(const Point&)> grad;
    std::function<double(const Point&)> rhs;   // f
    /// True when value(lambda x, lambda^2 t) = lambda^2 value(x, t).
    bool homogeneous = false;
};

/// 1/2 ((x.e - a)^+)^2 with f = 1; e is normalized.
ExactProfile halfspace(int n, Vec e = {1.0, 0.0}, double offset = 0.0);
/// 1/2 x^T M x + (tr M - f) t, solving H u = f wherever u != 0.
ExactProfile polynomial(int n, std::array<std::array<double, kMaxDim>, kMaxDim> M, double f = 1.0);
/// sign * (t - t0)^+ with f = -sign. sign = -1 is the Lipschitz-in-time barrier -(t - t0)^+.
ExactProfile time_barrier(int n, double t0, double sign = -1.0);
/// x_1^4 with f = 12 x_1^2 (smooth, non-homogeneous test field).
ExactProfile quartic(int n);

/// Registry lookup. `params` is a comma separated list:
///   halfspace:    e1[,e2[,offset]]
///   polynomial:   M11[,M12,M22][;f]     (n=1: M11[;f])
///   time_barrier: t0[,sign]
///   quartic:      (empty)
ExactProfile make_exact(const std::string& tag, const std::string& params, int n);

struct RegistryEntry {
    std::string tag;
    std::string formula;
    std::string default_params;
};
const std::vector<RegistryEntry>& exact_registry();

}  // namespace parobst
