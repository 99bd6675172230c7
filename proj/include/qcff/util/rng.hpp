#pragma once

#include <cstdint>
#include <random>

namespace qcff {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to turn structured keys into independent seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic stream seed for (base seed, set id, replica index, purpose).
/// Every replica/bin task derives its own seed through this, so a parallel
/// schedule reproduces the serial one exactly.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::int64_t set_id,
                                    std::uint64_t replica, std::uint64_t stream = 0) {
    std::uint64_t h = mix64(base);
    h = mix64(h ^ static_cast<std::uint64_t>(set_id));
    h = mix64(h ^ replica);
    h = mix64(h ^ stream);
    return h;
}

// Stream tags for derive_seed.
namespace streams {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kNoise = 2;
inline constexpr std::uint64_t kGrowth = 3;
inline constexpr std::uint64_t kBootstrap = 4;
inline constexpr std::uint64_t kDropout = 5;
inline constexpr std::uint64_t kGenerator = 6;
} // namespace streams

} // namespace qcff
