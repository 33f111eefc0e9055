// Copyright 2026 the chainbench authors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

namespace chainbench {

// All clocks (virtual and wall) are int64 nanoseconds from the run epoch.
using Nanos = std::int64_t;
inline constexpr Nanos kNanosPerMicro = 1'000;
inline constexpr Nanos kNanosPerMilli = 1'000'000;
inline constexpr Nanos kNanosPerSecond = 1'000'000'000;

inline double to_seconds(Nanos ns) { return static_cast<double>(ns) / 1e9; }

// Opaque account address. 64 bits is plenty for a simulated target; rendered
// as 16 hex digits wherever it crosses a file or wire boundary.
struct Address {
    std::uint64_t value = 0;

    auto operator<=>(const Address&) const = default;

    std::string to_hex() const;
    static Address from_hex(const std::string& hex);
};

// FNV-1a, used for block ids, auth tags and state hashes. Not cryptographic
// by design: the target models validation cost, not adversarial signatures.
class Fnv1a {
public:
    void update(const void* data, std::size_t len) {
        const auto* p = static_cast<const std::uint8_t*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            hash_ ^= p[i];
            hash_ *= 0x100000001b3ull;
        }
    }
    void update_u64(std::uint64_t v) {
        std::uint8_t b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
        update(b, 8);
    }
    std::uint64_t digest() const { return hash_; }

private:
    std::uint64_t hash_ = 0xcbf29ce484222325ull;
};

inline std::uint64_t fnv1a(std::span<const std::uint8_t> bytes) {
    Fnv1a h;
    h.update(bytes.data(), bytes.size());
    return h.digest();
}

// Thrown for invalid configurations; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Thrown when a benchmark run cannot proceed; the CLI maps it to exit code 3.
class RunError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace chainbench
