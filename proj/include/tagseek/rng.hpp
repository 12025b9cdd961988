#pragma once

#include <cstdint>

namespace tagseek {

/// splitmix64 finalizer; used to derive independent stream seeds from one trial seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

enum class SeedStream : std::uint64_t { oracle = 1, policy = 2, initial_tags = 3, synthetic = 4 };

constexpr std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream) {
    return mix_seed(mix_seed(seed) ^ static_cast<std::uint64_t>(stream));
}

} // namespace tagseek
