#include "parobst/seed.hpp"

#include <cstdlib>
#include <random>
#include <string>

#include "parobst/grid.hpp"

namespace parobst {

std::uint64_t env_seed() {
    const char* s = std::getenv("PAROBST_SEED");
    if (s == nullptr || *s == '\0') return 0;
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(s, &used);
        if (s[used] != '\0') throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DomainError(std::string("PAROBST_SEED is not an unsigned integer: ") + s);
    }
}

double seed_fraction(std::uint64_t seed) {
    if (seed == 0) return 0.0;
    std::mt19937_64 rng(seed);
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace parobst
