#include "level_system.hpp"

#include <cassert>
#include <stdexcept>
#include <unordered_map>

namespace parobst::detail {

LevelSystem::LevelSystem(const SpaceTimeGrid& g, std::vector<std::size_t> space,
                         std::vector<std::vector<int>> neighbours)
    : space_(std::move(space)), nbrs_(std::move(neighbours)) {
    n_ = g.dim();
    inv_h2_ = 1.0 / (g.h() * g.h());
    inv_k_ = 1.0 / g.k();
    diag_ = inv_k_ + 2.0 * n_ * inv_h2_;
    shell_.assign(space_.size(), 0);
    for (std::size_t b = 0; b < space_.size(); ++b)
        for (int j : nbrs_[b])
            if (j < 0) shell_[b] = 1;
    // Shell nodes are always fixed.
    set_fixed(shell_);
}

LevelSystem LevelSystem::for_domain(const SpaceTimeGrid& g, const CylinderDomain& dom) {
    std::vector<std::size_t> space;
    const std::size_t base = static_cast<std::size_t>(dom.bottom_level) * g.nodes_per_level();
    for (auto idx : dom.bottom.indices()) space.push_back(idx - base);
    std::unordered_map<std::size_t, int> pos;
    for (std::size_t b = 0; b < space.size(); ++b) pos.emplace(space[b], static_cast<int>(b));

    std::vector<std::vector<int>> nbrs(space.size());
    for (std::size_t b = 0; b < space.size(); ++b) {
        const NodeIndex a = g.unflat(space[b]);
        for (int d = 0; d < g.dim(); ++d) {
            for (int s : {-1, 1}) {
                NodeIndex c = a;
                c.i[d] += s;
                int p = -1;
                if (g.in_space(c.i)) {
                    auto it = pos.find(g.flat(c));
                    if (it != pos.end()) p = it->second;
                }
                nbrs[b].push_back(p);
            }
        }
    }
    return LevelSystem(g, std::move(space), std::move(nbrs));
}

void LevelSystem::set_fixed(const std::vector<char>& fixed) {
    assert(fixed.size() == space_.size());
    if (factorized_ && fixed == fixed_) return;
    fixed_ = fixed;
    for (std::size_t b = 0; b < space_.size(); ++b)
        if (shell_[b]) fixed_[b] = 1;

    unknown_of_.assign(space_.size(), -1);
    ball_of_.clear();
    for (std::size_t b = 0; b < space_.size(); ++b) {
        if (fixed_[b]) continue;
        unknown_of_[b] = static_cast<int>(ball_of_.size());
        ball_of_.push_back(static_cast<int>(b));
    }
    const auto nu = static_cast<Eigen::Index>(ball_of_.size());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(ball_of_.size() * (2 * n_ + 1));
    for (std::size_t u = 0; u < ball_of_.size(); ++u) {
        const auto b = static_cast<std::size_t>(ball_of_[u]);
        trip.emplace_back(static_cast<int>(u), static_cast<int>(u), diag_);
        for (int j : nbrs_[b]) {
            if (j < 0 || unknown_of_[j] < 0) continue;
            trip.emplace_back(static_cast<int>(u), unknown_of_[j], -inv_h2_);
        }
    }
    Eigen::SparseMatrix<double> A(nu, nu);
    A.setFromTriplets(trip.begin(), trip.end());
    if (nu > 0) {
        ldlt_.compute(A);
        // Backward Euler with h, k > 0 gives an SPD M-matrix, so this should not fire.
        if (ldlt_.info() != Eigen::Success) throw std::runtime_error("level system factorization failed");
    }
    factorized_ = true;
}

void LevelSystem::step(std::vector<double>& level_vals, const std::vector<double>& prev_vals,
                       const std::vector<double>& source) const {
    if (ball_of_.empty()) return;
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(ball_of_.size()));
    for (std::size_t u = 0; u < ball_of_.size(); ++u) {
        const auto b = static_cast<std::size_t>(ball_of_[u]);
        double r = prev_vals[b] * inv_k_ - source[b];
        for (int j : nbrs_[b])
            if (j >= 0 && unknown_of_[j] < 0) r += inv_h2_ * level_vals[j];
        rhs[static_cast<Eigen::Index>(u)] = r;
    }
    const Eigen::VectorXd x = ldlt_.solve(rhs);
    for (std::size_t u = 0; u < ball_of_.size(); ++u)
        level_vals[static_cast<std::size_t>(ball_of_[u])] = x[static_cast<Eigen::Index>(u)];
}

double LevelSystem::heat(std::size_t b, const std::vector<double>& level_vals,
                         const std::vector<double>& prev_vals) const {
    double lap = -2.0 * n_ * level_vals[b];
    for (int j : nbrs_[b]) {
        assert(j >= 0);
        lap += level_vals[j];
    }
    return lap * inv_h2_ - (level_vals[b] - prev_vals[b]) * inv_k_;
}

}  // namespace parobst::detail
