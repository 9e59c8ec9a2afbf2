#pragma once

#include <cstdint>

namespace expander {

// splitmix64: 64-bit mixing generator (Steele/Lea/Flood gamma sequence).
// Streams are derived, not sequenced, so independent trials/columns can be
// generated in any order or in parallel and still be bit-reproducible.
struct SplitMix64 {
    std::uint64_t state = 0;

    explicit SplitMix64(std::uint64_t s = 0) : state(s) {}

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t next() {
        state += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Unbiased integer in [0, bound], bound inclusive. Rejection sampling.
    std::uint64_t uniform_below(std::uint64_t bound_inclusive) {
        const std::uint64_t m = bound_inclusive + 1;  // m == 0 means full range
        if (m == 0) return next();
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % m;
        std::uint64_t v = next();
        while (v >= limit) v = next();
        return v % m;
    }

    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

// (seed, trial, column) -> independent stream. Double-mixing keeps distinct
// coordinate triples from colliding in practice.
inline SplitMix64 derive_stream(std::uint64_t seed, std::uint64_t trial, std::uint64_t column) {
    std::uint64_t h = SplitMix64::mix(seed);
    h = SplitMix64::mix(h ^ (0x9e3779b97f4a7c15ULL + trial));
    h = SplitMix64::mix(h ^ (0xd1b54a32d192ed03ULL + column));
    return SplitMix64(h);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t trial) {
    return SplitMix64::mix(SplitMix64::mix(seed) ^ (0x9e3779b97f4a7c15ULL + trial));
}

}  // namespace expander
