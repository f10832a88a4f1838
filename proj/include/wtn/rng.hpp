#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace wtn {

/// Engine used for every randomized step. std::mt19937_64 output is fully
/// specified by the standard; the helpers below avoid std distributions,
/// whose output is implementation-defined, so results match across
/// standard libraries.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for stream (a, b) under a master seed. Each coordinate is folded
/// in through its own SplitMix64 round, so (a, b) and (b, a) differ.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) noexcept {
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ splitmix64(a + 0x632be59bd9b4e019ULL));
    h = splitmix64(h ^ splitmix64(b + 0x85157af5ULL));
    return h;
}

/// Uniform integer in [0, bound) by rejection sampling. bound must be > 0.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
    const std::uint64_t limit = Rng::max() - (Rng::max() % bound + 1) % bound;
    std::uint64_t x = rng();
    while (x > limit) x = rng();
    return x % bound;
}

/// Fisher-Yates shuffle driven by uniform_below.
template <class T>
void shuffle(std::span<T> items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_below(rng, i));
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace wtn
