// Copyright 2026 The LQER Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace lqer {

using Rng = std::mt19937_64;

namespace detail {
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30U)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27U)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31U);
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}
} // namespace detail

/// Seed of a named sub-stream ("data", "init", "augment", "shuffle", ...)
/// derived from the run seed. Streams are independent of each other, so
/// consuming more draws in one never shifts another.
constexpr std::uint64_t substream_seed(std::uint64_t seed,
                                       std::string_view name) noexcept {
    return detail::splitmix64(seed ^ detail::splitmix64(detail::fnv1a(name)));
}

/// Counter-based seed for per-item streams (e.g. augmentation of sample i in
/// epoch e); results do not depend on processing order.
constexpr std::uint64_t counter_seed(std::uint64_t base, std::uint64_t a,
                                     std::uint64_t b = 0) noexcept {
    return detail::splitmix64(base ^ detail::splitmix64(a ^ detail::splitmix64(b + 1)));
}

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

inline Rng make_rng(std::uint64_t seed, std::string_view stream) {
    return Rng{substream_seed(seed, stream)};
}

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
inline double uniform01(Rng &rng) {
    return static_cast<double>(rng() >> 11U) * 0x1.0p-53;
}

inline double uniform(Rng &rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

/// Uniform integer in [0, n). Rejection sampling keeps it unbiased.
inline std::uint64_t uniform_index(Rng &rng, std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = 0;
    do {
        v = rng();
    } while (v >= limit);
    return v % n;
}

/// Standard normal draw (Box-Muller, one value per call).
inline double normal01(Rng &rng) {
    constexpr double two_pi = 6.283185307179586476925286766559;
    double u1 = uniform01(rng);
    while (u1 <= 0.0) {
        u1 = uniform01(rng);
    }
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

} // namespace lqer
