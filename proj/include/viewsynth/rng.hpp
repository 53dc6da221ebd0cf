#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace viewsynth {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to decorrelate derived seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// FNV-1a over the bytes of a string; stable across platforms and runs.
constexpr std::uint64_t fnv1a(std::string_view s)
{
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (const char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Seed of an independent stream keyed by (master seed, stable id, index).
/// Adding or removing other keys never changes the seed of an existing key.
constexpr std::uint64_t stream_seed(std::uint64_t master, std::string_view key, std::uint64_t index)
{
    return splitmix64(splitmix64(master ^ fnv1a(key)) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

} // namespace viewsynth
