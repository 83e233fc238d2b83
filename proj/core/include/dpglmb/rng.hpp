#pragma once

#include <cstdint>
#include <initializer_list>

namespace dpglmb {

/// SplitMix64 finalizer. Used to derive independent stream seeds from a base
/// seed and a tuple of indices (run, step, purpose) without shared state.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t h = splitmix64(base);
    for (auto k : keys) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
    return h;
}

/// Stream tags so that e.g. scenario geometry and clutter never share a stream.
enum class Stream : std::uint64_t {
    Scenario = 1,
    Frame = 2,
    Gibbs = 3,
};

}  // namespace dpglmb
