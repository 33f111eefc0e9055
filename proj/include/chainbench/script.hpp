// Copyright 2026 the chainbench authors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chainbench/bytes.hpp"
#include "chainbench/common.hpp"

namespace chainbench {

enum class ScriptKind : std::uint8_t { Transfer = 0, DoNothing = 1, VmHeavy = 2 };

const char* to_string(ScriptKind kind);
std::optional<ScriptKind> script_kind_from_string(const std::string& name);

// One of the three fixed workload scripts. Immutable after construction; only
// these three shapes are constructible, there is no general script front end.
class Script {
public:
    // amount must be positive; throws ConfigError otherwise.
    static Script transfer(Address payee, std::uint64_t amount);
    static Script do_nothing();
    static Script vm_heavy(std::uint64_t iterations);

    ScriptKind kind() const { return kind_; }
    // Valid only for the matching kind.
    Address payee() const { return payee_; }
    std::uint64_t amount() const { return amount_; }
    std::uint64_t iterations() const { return iterations_; }

    void encode(ByteWriter& w) const;
    static Script decode(ByteReader& r);
    std::vector<std::uint8_t> encode_bytes() const;

    bool operator==(const Script&) const = default;

private:
    Script() = default;

    ScriptKind kind_ = ScriptKind::DoNothing;
    Address payee_{};
    std::uint64_t amount_ = 0;
    std::uint64_t iterations_ = 0;
};

// The submission envelope. The auth tag is a stub signature:
// fnv1a(sender || sequence_number || script bytes).
struct SignedTransaction {
    Address sender{};
    std::uint64_t sequence_number = 0;
    Script script = Script::do_nothing();
    Nanos expiration = 0;
    std::uint64_t max_steps = kDefaultMaxSteps;
    std::uint64_t auth_tag = 0;

    static constexpr std::uint64_t kDefaultMaxSteps = 1'000'000;
    static constexpr Nanos kDefaultExpirationWindow = 60 * kNanosPerSecond;

    bool operator==(const SignedTransaction&) const = default;
};

std::uint64_t compute_auth_tag(const Address& sender, std::uint64_t sequence_number,
                               const Script& script);

// Builds a transaction with the stub auth tag filled in and expiration
// defaulted to submit_time + 60 s.
SignedTransaction make_signed_txn(Address sender, std::uint64_t sequence_number, Script script,
                                  Nanos submit_time,
                                  std::uint64_t max_steps = SignedTransaction::kDefaultMaxSteps);

// Canonical deterministic encoding; decode(encode(t)) == t, and byte equality
// of encodings implies structural equality.
std::vector<std::uint8_t> encode_txn(const SignedTransaction& txn);
SignedTransaction decode_txn(std::span<const std::uint8_t> bytes);

}  // namespace chainbench
