#pragma once

// Portable seeded streams. std:: distributions are implementation-defined, so
// every draw goes through these helpers instead.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace eba::rng {

inline std::uint64_t fnv1a(std::string_view domain, std::string_view key) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](unsigned char c) {
        h ^= c;
        h *= 0x100000001b3ULL;
    };
    for (char c : domain) mix(static_cast<unsigned char>(c));
    mix(0);
    for (char c : key) mix(static_cast<unsigned char>(c));
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for sub-stream `index` of `seed`.
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Seed for the stream named `key` under `seed`.
inline std::uint64_t keyed(std::uint64_t seed, std::string_view domain, std::string_view key) noexcept {
    return splitmix64(seed ^ splitmix64(fnv1a(domain, key)));
}

/// Uniform in [0,1).
inline double unit(std::mt19937_64& g) noexcept { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

/// Uniform in (0,1).
inline double open_unit(std::mt19937_64& g) noexcept {
    return (static_cast<double>(g() >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal, one Box-Muller draw per call (two uniforms).
inline double normal(std::mt19937_64& g) noexcept {
    const double r = std::sqrt(-2.0 * std::log(open_unit(g)));
    return r * std::cos(2.0 * std::numbers::pi * open_unit(g));
}

}  // namespace eba::rng
