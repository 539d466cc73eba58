#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace wfcmdp {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Mixes a base seed with stream coordinates into an independent seed.
inline constexpr std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> coords) {
    std::uint64_t h = splitmix64(base);
    for (auto c : coords) h = splitmix64(h ^ splitmix64(c + 0x632be59bd9b4e019ULL));
    return h;
}

/// Random stream for (run seed, generation, member index, purpose). Results
/// depend only on these coordinates, never on which thread draws them.
inline Rng stream(std::uint64_t run_seed, std::uint64_t generation, std::uint64_t index, std::uint64_t purpose) {
    return Rng(derive_seed(run_seed, {generation, index, purpose}));
}

}  // namespace wfcmdp
