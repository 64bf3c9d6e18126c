#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace msheet {

// splitmix64 finalizer; used to derive independent seeds from a base seed
// plus arbitrary discriminators (sample ids, repetition indices, ...).
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// FNV-1a, 64-bit.
inline std::uint64_t hash_str(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a) {
    return mix64(base ^ mix64(a));
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    return mix64(derive_seed(base, a) ^ mix64(b));
}

// Deterministic random stream. mt19937_64 output is pinned by the standard;
// the distribution transforms live here because the std ones are
// implementation-defined and would break bit-reproducibility across stdlibs.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // unbiased integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return x % n;
    }

    // standard normal via Box-Muller; two uniforms per call, no cached spare
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793238462643 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // exponential with the given scale (mean)
    double exponential(double scale) {
        double u = uniform();
        while (u >= 1.0) u = uniform();
        return -scale * std::log1p(-u);
    }

    // exponential magnitude with an independent random sign; Laplace(0, scale)
    double signed_exponential(double scale) {
        const bool negative = uniform() < 0.5;
        const double mag = exponential(scale);
        return negative ? -mag : mag;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace msheet
