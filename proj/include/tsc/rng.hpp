#pragma once

#include <cstdint>

namespace tsc {

// Finalizer from the splitmix64 generator. Used both to advance sequential
// streams and to derive counter-keyed substreams (arrivals must be a pure
// function of (seed, second, approach) so that every controller sharing a
// seed sees the same traffic no matter what else consumes randomness).
inline uint64_t mix64(uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline uint64_t hash_combine(uint64_t a, uint64_t b) {
    return mix64(a ^ (mix64(b) + 0x9E3779B97F4A7C15ull + (a << 6) + (a >> 2)));
}

class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ull;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1).
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n). Multiply-shift; fine for the small n used here.
    int next_below(int n) { return static_cast<int>(next_double() * static_cast<double>(n)); }

private:
    uint64_t state_;
};

}  // namespace tsc
