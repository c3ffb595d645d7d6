#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace netdelay {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives an independent stream seed from a master seed and a path of
/// counters, e.g. derive_seed(master, {stream_tag, sample_index}). Each
/// component is folded through mix64, so sibling streams do not depend on
/// how many siblings exist.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t h = mix64(master ^ 0x6a09e667f3bcc908ULL);
    for (std::uint64_t p : path) h = mix64(h ^ mix64(p + 0x3c6ef372fe94f82bULL));
    return h;
}

// Stream tags used with derive_seed.
namespace stream {
inline constexpr std::uint64_t traffic_matrix = 1;
inline constexpr std::uint64_t simulation = 2;
inline constexpr std::uint64_t flow = 3;
inline constexpr std::uint64_t probe_matrix = 4;
inline constexpr std::uint64_t probe_simulation = 5;
inline constexpr std::uint64_t split = 6;
inline constexpr std::uint64_t init = 7;
inline constexpr std::uint64_t shuffle = 8;
inline constexpr std::uint64_t topology = 9;
inline constexpr std::uint64_t dataset = 10;
inline constexpr std::uint64_t training = 11;
inline constexpr std::uint64_t variance = 12;
} // namespace stream

/// Uniform draw on (0, 1].
inline double uniform_open_closed(Rng& rng) {
    return 1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

} // namespace netdelay
