#pragma once

#include "vwos/core.h"

#include <cstdint>

namespace vwos {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// PCG32 (O'Neill). One instance per walk; streams are derived by hashing
// (seed, point, configuration, walk) so results do not depend on scheduling.
class Pcg32 {
public:
    Pcg32() : Pcg32(0x853c49e6748fea9bULL, 0xda3e39cb94b95bdbULL) {}

    Pcg32(std::uint64_t initstate, std::uint64_t initseq) {
        state_ = 0u;
        inc_ = (initseq << 1u) | 1u;
        next_u32();
        state_ += initstate;
        next_u32();
    }

    std::uint32_t next_u32() {
        std::uint64_t oldstate = state_;
        state_ = oldstate * 6364136223846793005ULL + inc_;
        std::uint32_t xorshifted = static_cast<std::uint32_t>(((oldstate >> 18u) ^ oldstate) >> 27u);
        std::uint32_t rot = static_cast<std::uint32_t>(oldstate >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((~rot + 1u) & 31u));
    }

    // uniform in [0,1) with 53 random bits
    Scalar uniform() {
        const std::uint64_t hi = next_u32() >> 5;   // 27 bits
        const std::uint64_t lo = next_u32() >> 6;   // 26 bits
        return static_cast<Scalar>((hi << 26) | lo) * 0x1.0p-53;
    }

    Scalar uniform(Scalar lo, Scalar hi) { return lo + (hi - lo) * uniform(); }

private:
    std::uint64_t state_;
    std::uint64_t inc_;
};

inline std::uint64_t mix_keys(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2) + splitmix64(b)));
}

// Canonical stream for walk `w` from point `p` under configuration `c`.
// Direct solves use c = 0; ensemble averaging uses the configuration index.
inline Pcg32 walk_rng(std::uint64_t seed, std::uint64_t point, std::uint64_t config,
                      std::uint64_t walk) {
    const std::uint64_t k = mix_keys(mix_keys(seed, point), mix_keys(config, walk));
    return Pcg32(splitmix64(k), splitmix64(k ^ 0x5851f42d4c957f2dULL));
}

// Stream used to draw explicit particle configurations.
inline Pcg32 config_rng(std::uint64_t seed, std::uint64_t config) {
    const std::uint64_t k = mix_keys(seed ^ 0xc0f1607a1ULL, config);
    return Pcg32(splitmix64(k), splitmix64(k ^ 0x2545f4914f6cdd1dULL));
}

} // namespace vwos
