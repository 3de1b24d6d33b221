#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace a2c {

/// splitmix64 finalizer. Used to derive per-key streams from a seed so results
/// do not depend on iteration order.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t mix64(std::uint64_t seed, std::uint64_t key) noexcept {
    return mix64(seed ^ mix64(key));
}

constexpr std::uint64_t hash_name(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Uniform value in [0, 1) with 53 random bits.
constexpr double unit_interval(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Keyed uniform draw: same (seed, key) always gives the same value.
constexpr double keyed_uniform(std::uint64_t seed, std::uint64_t key) noexcept {
    return unit_interval(mix64(seed, key));
}

using Rng = std::mt19937_64;

/// Unbiased index in [0, n). Portable, unlike std::uniform_int_distribution.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = Rng::max() - Rng::max() % bound;
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return static_cast<std::size_t>(v % bound);
}

template <typename T>
void shuffle(std::vector<T>& values, Rng& rng) {
    for (std::size_t i = values.size(); i > 1; --i) {
        std::swap(values[i - 1], values[uniform_index(rng, i)]);
    }
}

/// Standard normal via Box-Muller on portable uniforms.
inline double standard_normal(Rng& rng) {
    double u1 = unit_interval(rng());
    while (u1 <= 0.0) u1 = unit_interval(rng());
    const double u2 = unit_interval(rng());
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace a2c
