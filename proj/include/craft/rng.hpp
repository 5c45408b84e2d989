#pragma once

#include <cmath>
#include <cstdint>

namespace craft {

// Stateless 64-bit finalizer (the splitmix64 output function).
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Minimal deterministic generator. Construction is free, so one independent
// stream per work item (bucket, pair, ...) keeps parallel generation
// identical to serial generation.
struct SplitMix64 {
    std::uint64_t state = 0;

    SplitMix64() = default;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    using result_type = std::uint64_t;
    static constexpr std::uint64_t min() { return 0; }
    static constexpr std::uint64_t max() { return ~std::uint64_t{0}; }

    std::uint64_t operator()() {
        state += 0x9E3779B97F4A7C15ull;
        return mix64(state);
    }
};

// Deterministic sub-stream seed derived from a root seed and up to two
// stream coordinates.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s = mix64(seed + 0x9E3779B97F4A7C15ull * (a + 1));
    return mix64(s + 0x9E3779B97F4A7C15ull * (b + 1));
}

// Exactly uniform integer in [0, n) via rejection; portable across platforms.
template <class G>
std::uint64_t uniform_below(G& g, std::uint64_t n) {
    const std::uint64_t limit = n * (~std::uint64_t{0} / n);
    std::uint64_t r;
    do {
        r = g();
    } while (r >= limit);
    return r % n;
}

// Uniform double in [0, 1) with 53 random bits.
template <class G>
double uniform01(G& g) {
    return double(g() >> 11) * 0x1.0p-53;
}

// Box-Muller pair of standard normals.
template <class G>
void normal_pair(G& g, double& z0, double& z1) {
    double u1 = uniform01(g);
    while (u1 <= 0.0) u1 = uniform01(g);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * uniform01(g);
    z0 = r * std::cos(theta);
    z1 = r * std::sin(theta);
}

}  // namespace craft
