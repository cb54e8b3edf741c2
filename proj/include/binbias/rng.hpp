#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace binbias {

// Deterministic RNG helpers. std::mt19937_64 has a standard-pinned
// algorithm, but the standard distributions do not, so the samplers
// below are hand-rolled to keep seeded runs reproducible.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // Box-Muller without spare caching, two uniforms per draw
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return r * std::cos(2.0 * M_PI * u2);
    }

    double normal(double mean, double stddev) {
        return mean + stddev * normal();
    }

    // integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        return n == 0 ? 0 : gen_() % n;
    }

  private:
    std::mt19937_64 gen_;
};

// SplitMix64 finalizer, used to derive independent sub-seeds.
inline std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char ch : tag) {
        h ^= static_cast<unsigned char>(ch);
        h *= 1099511628211ULL;
    }
    return mix_seed(seed ^ h);
}

} // namespace binbias
