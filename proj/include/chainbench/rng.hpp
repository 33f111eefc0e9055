// Copyright 2026 the chainbench authors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>

namespace chainbench {

// SplitMix64. Standard-library distributions are implementation-defined, and
// report determinism is a hard requirement, so the simulator draws all of its
// randomness from this generator.
class DetRng {
public:
    explicit DetRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) from the top 53 bits.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * (1.0 / 9007199254740992.0);
    }

    // Uniform integer in [lo, hi], inclusive. Modulo bias is irrelevant at the
    // ranges the simulator uses (jitter windows of a few thousand ns).
    std::int64_t next_in_range(std::int64_t lo, std::int64_t hi) {
        if (hi <= lo) return lo;
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next_u64() % span);
    }

private:
    std::uint64_t state_;
};

// Stable sub-seed derivation for repetitions and per-row seeds.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    DetRng r(base ^ (0x9e3779b97f4a7c15ull * (stream + 1)));
    return r.next_u64();
}

}  // namespace chainbench
