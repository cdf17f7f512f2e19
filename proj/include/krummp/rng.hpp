#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace krummp {

/// splitmix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Folds an ordered key (seed, stage, trial, ...) into a single stream seed.
/// Different key tuples give unrelated streams; the same tuple always gives
/// the same one.
constexpr std::uint64_t derive_seed(std::initializer_list<std::uint64_t> key) noexcept
{
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (auto k : key)
        h = splitmix64(h ^ splitmix64(k));
    return h;
}

using Stream = std::mt19937_64;

inline Stream make_stream(std::initializer_list<std::uint64_t> key)
{
    return Stream(derive_seed(key));
}

} // namespace krummp
