#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace calib {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based stream derivation: the seed for (master, k1, k2, ...) depends
// only on those values, never on the order in which streams are requested.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> counters) noexcept {
    std::uint64_t s = splitmix64(master);
    for (std::uint64_t c : counters) s = splitmix64(s ^ splitmix64(c + 0x632be59bd9b4e019ULL));
    return s;
}

inline Rng make_rng(std::uint64_t master, std::initializer_list<std::uint64_t> counters = {}) {
    return Rng(derive_seed(master, counters));
}

}  // namespace calib
