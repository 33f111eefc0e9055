// Copyright 2026 the chainbench authors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "chainbench/script.hpp"

#include <cstdio>

namespace chainbench {

std::string Address::to_hex() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return std::string(buf);
}

Address Address::from_hex(const std::string& hex) {
    if (hex.empty() || hex.size() > 16) throw ConfigError("bad address literal: " + hex);
    std::uint64_t v = 0;
    for (char c : hex) {
        v <<= 4;
        if (c >= '0' && c <= '9')
            v |= static_cast<std::uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f')
            v |= static_cast<std::uint64_t>(c - 'a' + 10);
        else if (c >= 'A' && c <= 'F')
            v |= static_cast<std::uint64_t>(c - 'A' + 10);
        else
            throw ConfigError("bad address literal: " + hex);
    }
    return Address{v};
}

const char* to_string(ScriptKind kind) {
    switch (kind) {
        case ScriptKind::Transfer: return "transfer";
        case ScriptKind::DoNothing: return "do_nothing";
        case ScriptKind::VmHeavy: return "vm_heavy";
    }
    return "unknown";
}

std::optional<ScriptKind> script_kind_from_string(const std::string& name) {
    if (name == "transfer") return ScriptKind::Transfer;
    if (name == "do_nothing") return ScriptKind::DoNothing;
    if (name == "vm_heavy") return ScriptKind::VmHeavy;
    return std::nullopt;
}

Script Script::transfer(Address payee, std::uint64_t amount) {
    if (amount == 0) throw ConfigError("transfer amount must be positive");
    Script s;
    s.kind_ = ScriptKind::Transfer;
    s.payee_ = payee;
    s.amount_ = amount;
    return s;
}

Script Script::do_nothing() {
    Script s;
    s.kind_ = ScriptKind::DoNothing;
    return s;
}

Script Script::vm_heavy(std::uint64_t iterations) {
    Script s;
    s.kind_ = ScriptKind::VmHeavy;
    s.iterations_ = iterations;
    return s;
}

void Script::encode(ByteWriter& w) const {
    w.put_u8(static_cast<std::uint8_t>(kind_));
    switch (kind_) {
        case ScriptKind::Transfer:
            w.put_u64(payee_.value);
            w.put_u64(amount_);
            break;
        case ScriptKind::DoNothing:
            break;
        case ScriptKind::VmHeavy:
            w.put_u64(iterations_);
            break;
    }
}

Script Script::decode(ByteReader& r) {
    const std::size_t at = r.position();
    const std::uint8_t kind = r.get_u8();
    switch (kind) {
        case static_cast<std::uint8_t>(ScriptKind::Transfer): {
            Address payee{r.get_u64()};
            const std::uint64_t amount = r.get_u64();
            if (amount == 0) throw DecodeError(at, "transfer amount must be positive");
            return transfer(payee, amount);
        }
        case static_cast<std::uint8_t>(ScriptKind::DoNothing):
            return do_nothing();
        case static_cast<std::uint8_t>(ScriptKind::VmHeavy):
            return vm_heavy(r.get_u64());
        default:
            throw DecodeError(at, "unknown script kind " + std::to_string(kind));
    }
}

std::vector<std::uint8_t> Script::encode_bytes() const {
    ByteWriter w;
    encode(w);
    return w.take();
}

std::uint64_t compute_auth_tag(const Address& sender, std::uint64_t sequence_number,
                               const Script& script) {
    Fnv1a h;
    h.update_u64(sender.value);
    h.update_u64(sequence_number);
    const auto body = script.encode_bytes();
    h.update(body.data(), body.size());
    return h.digest();
}

SignedTransaction make_signed_txn(Address sender, std::uint64_t sequence_number, Script script,
                                  Nanos submit_time, std::uint64_t max_steps) {
    SignedTransaction txn;
    txn.sender = sender;
    txn.sequence_number = sequence_number;
    txn.script = std::move(script);
    txn.expiration = submit_time + SignedTransaction::kDefaultExpirationWindow;
    txn.max_steps = max_steps;
    txn.auth_tag = compute_auth_tag(txn.sender, txn.sequence_number, txn.script);
    return txn;
}

std::vector<std::uint8_t> encode_txn(const SignedTransaction& txn) {
    ByteWriter w;
    w.put_u64(txn.sender.value);
    w.put_u64(txn.sequence_number);
    w.put_blob(txn.script.encode_bytes());
    w.put_i64(txn.expiration);
    w.put_u64(txn.max_steps);
    w.put_u64(txn.auth_tag);
    return w.take();
}

SignedTransaction decode_txn(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    SignedTransaction txn;
    txn.sender = Address{r.get_u64()};
    txn.sequence_number = r.get_u64();
    const auto script_bytes = r.get_blob();
    {
        ByteReader sr(script_bytes);
        txn.script = Script::decode(sr);
        sr.expect_exhausted();
    }
    txn.expiration = r.get_i64();
    txn.max_steps = r.get_u64();
    if (txn.max_steps == 0) throw DecodeError(r.position() - 8, "max_steps must be positive");
    txn.auth_tag = r.get_u64();
    r.expect_exhausted();
    return txn;
}

}  // namespace chainbench
