#pragma once

#include <cmath>
#include <cstdint>

namespace vranfair {

// Deterministic keyed random streams.  Every random quantity in a scenario is
// drawn from its own stream keyed by (seed, scenario tag, slot, entity, field),
// so regeneration is bit-identical no matter in which order slots are built.
// splitmix64 is used both to fold the key and to advance the stream; uniform
// and normal draws are derived by hand (53-bit mantissa scaling, Box-Muller)
// so results do not depend on the C++ library's distribution internals.

inline uint64_t splitmix64(uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct RngStream {
    uint64_t state = 0;

    uint64_t next_u64() { return splitmix64(state); }

    // Uniform on [0, 1).
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    // Standard normal via Box-Muller; one value per call, the cosine leg.
    double normal() {
        double u1 = next_unit();
        while (u1 <= 0.0) u1 = next_unit();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return r * std::cos(6.283185307179586476925286766559 * u2);
    }
};

inline RngStream stream_for(uint64_t seed, uint64_t scenario_tag, uint64_t slot,
                            uint64_t entity, uint64_t field) {
    uint64_t s = seed;
    (void)splitmix64(s);
    s ^= 0x6a09e667f3bcc909ULL ^ scenario_tag;
    (void)splitmix64(s);
    s ^= 0xbb67ae8584caa73bULL ^ slot;
    (void)splitmix64(s);
    s ^= 0x3c6ef372fe94f82bULL ^ entity;
    (void)splitmix64(s);
    s ^= 0xa54ff53a5f1d36f1ULL ^ field;
    (void)splitmix64(s);
    return RngStream{s};
}

// Field tags for stream_for; fixed constants, part of the reproducibility
// contract (changing them changes every generated scenario).
namespace field {
constexpr uint64_t kArrival = 1;      // lambda / b
constexpr uint64_t kBlockSize = 2;    // n / rho
constexpr uint64_t kSnr = 3;          // s
constexpr uint64_t kPrice = 4;        // p
constexpr uint64_t kCapacity = 5;     // C
constexpr uint64_t kMean = 6;         // per-run mean draws
constexpr uint64_t kPredNoise = 7;    // prediction noise
constexpr uint64_t kInit = 8;         // seeded initial points
constexpr uint64_t kTraceBurst = 9;   // synthetic trace burst state
} // namespace field

} // namespace vranfair
