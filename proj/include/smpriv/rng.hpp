#pragma once

#include <cstdint>

namespace smpriv {

// splitmix64 finalizer; full-period 64-bit mixer.
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-based substream: a pure function of (seed, user, slot, draw), so
// traces are reproducible regardless of how slots are partitioned across
// workers.
inline std::uint64_t substream_u64(std::uint64_t seed, std::uint64_t user,
                                   std::uint64_t slot, std::uint64_t draw) {
    std::uint64_t z = splitmix64(seed ^ 0x243f6a8885a308d3ULL);
    z = splitmix64(z ^ (user * 0x452821e638d01377ULL + 0x13198a2e03707344ULL));
    z = splitmix64(z ^ (slot * 0xa4093822299f31d0ULL + 0x082efa98ec4e6c89ULL));
    z = splitmix64(z ^ (draw * 0xbe5466cf34e90c6cULL + 0xc0ac29b7c97c50ddULL));
    return z;
}

// Uniform double in [0, 1) with 53 random bits.
inline double substream_uniform(std::uint64_t seed, std::uint64_t user,
                                std::uint64_t slot, std::uint64_t draw) {
    return static_cast<double>(substream_u64(seed, user, slot, draw) >> 11) * 0x1.0p-53;
}

}  // namespace smpriv
