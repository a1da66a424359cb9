#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace gridflow {

// 64-bit FNV-1a. Used to derive per-entity seeds (e.g. per taxi) so that
// the order in which entities are processed cannot change their streams.
inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag) {
    return fnv1a64(tag, seed ^ 0x9e3779b97f4a7c15ULL);
}

/// Seeded random source with portable distributions. std:: distributions are
/// implementation-defined, so uniform/normal/poisson are done by hand here to
/// keep artifacts byte-identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform01() {
        // 53 random mantissa bits in [0,1)
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) { // inclusive bounds
        return lo + static_cast<std::int64_t>(uniform01() * static_cast<double>(hi - lo + 1));
    }

    double normal(double mean = 0.0, double sigma = 1.0) {
        // Box-Muller, one value per call (the pair's twin is discarded so the
        // draw count per event is fixed).
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        return mean + sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    int poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        // Knuth multiplication method; fine for the per-minute rates used here.
        double limit = std::exp(-lambda);
        int k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform01();
        } while (p > limit);
        return k - 1;
    }

    std::uint64_t next_u64() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

} // namespace gridflow
