#pragma once

// Backward-Euler step on a ball of nodes:
//   (1/k + 2n/h^2) u_i - (1/h^2) sum_{free nb} u_j = u_prev_i / k - f_i + (1/h^2) sum_{fixed nb} u_j
// for every free node i. Fixed nodes (lateral shell, pinned coincidence nodes)
// keep their prescribed value.

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cstddef>
#include <vector>

#include "parobst/grid.hpp"

namespace parobst::detail {

class LevelSystem {
public:
    /// `space` lists the in-level offsets of the ball nodes; `neighbours[b]`
    /// holds positions (into `space`) of the axis neighbours of node b, or -1.
    LevelSystem(const SpaceTimeGrid& g, std::vector<std::size_t> space,
                std::vector<std::vector<int>> neighbours);

    /// Builds the ball/neighbour tables for a cylinder's ball.
    static LevelSystem for_domain(const SpaceTimeGrid& g, const CylinderDomain& dom);

    std::size_t size() const { return space_.size(); }
    std::size_t offset(std::size_t b) const { return space_[b]; }
    const std::vector<int>& neighbours(std::size_t b) const { return nbrs_[b]; }
    bool on_shell(std::size_t b) const { return shell_[b] != 0; }

    /// Refactorizes when `fixed` differs from the cached pattern.
    void set_fixed(const std::vector<char>& fixed);
    const std::vector<char>& fixed() const { return fixed_; }

    /// Solves one level in place. `level_vals` holds values of the current level
    /// (fixed entries are read), `prev_vals` the previous level, `source` f.
    void step(std::vector<double>& level_vals, const std::vector<double>& prev_vals,
              const std::vector<double>& source) const;

    /// Discrete heat operator at ball node b for the given level values.
    double heat(std::size_t b, const std::vector<double>& level_vals,
                const std::vector<double>& prev_vals) const;

    double diag() const { return diag_; }
    double inv_h2() const { return inv_h2_; }

private:
    std::vector<std::size_t> space_;
    std::vector<std::vector<int>> nbrs_;
    std::vector<char> shell_;
    std::vector<char> fixed_;
    std::vector<int> unknown_of_;   // ball position -> unknown index or -1
    std::vector<int> ball_of_;      // unknown index -> ball position
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
    double inv_h2_ = 0, inv_k_ = 0, diag_ = 0;
    int n_ = 1;
    bool factorized_ = false;
};

}  // namespace parobst::detail
