#pragma once

#include <cstdint>

namespace parobst {

/// Seed for sampled direction sets and synthetic masks: PAROBST_SEED, default 0.
std::uint64_t env_seed();

/// Deterministic fraction in [0,1) derived from a seed; 0 for seed 0.
double seed_fraction(std::uint64_t seed);

}  // namespace parobst
