#pragma once

#include <cstdint>

#include "rankone/numeric.hpp"

namespace rankone {

// Deterministic splittable stream: the (seed, stream) pair fully determines
// the sequence, independent of platform or standard-library version. Workers
// sampling in parallel take distinct stream ids, so fan-out is reproducible.
class RandomStream {
  public:
    explicit RandomStream(uint64_t seed, uint64_t stream = 0)
        : state_(mix(seed + 0x9e3779b97f4a7c15ULL * (stream + 1))) {}

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Unbiased uniform in [0, n), n >= 1.
    uint64_t uniform_below(uint64_t n) {
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    // Unbiased uniform BigInt in [0, n), n >= 1, by masked rejection.
    BigInt uniform_below_big(const BigInt& n);

    // Exact Poisson sample. Large means are split into chunks <= 12 and the
    // chunk draws summed, which keeps Knuth's product method in safe range.
    int64_t poisson(double mean);

  private:
    static uint64_t mix(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    uint64_t state_;
};

}  // namespace rankone
