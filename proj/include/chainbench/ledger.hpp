// Copyright 2026 the chainbench authors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "chainbench/common.hpp"
#include "chainbench/script.hpp"
#include "chainbench/vm.hpp"

namespace chainbench {

struct AccountState {
    Address address{};
    std::uint64_t balance = 0;
    std::uint64_t sequence_number = 0;

    bool operator==(const AccountState&) const = default;
};

enum class RejectReason : std::uint8_t {
    UnknownSender,
    SeqGap,    // submitted sequence number does not match the account's next
    Expired,
    BadAuth,
    Duplicate,     // admission-level: same (sender, seq) already admitted
    Backpressure,  // admission-level: mempool full, retry with delay
};

const char* to_string(RejectReason reason);

struct ValidationResult {
    bool accepted = false;
    RejectReason reason = RejectReason::SeqGap;

    static ValidationResult accept() { return {true, RejectReason::SeqGap}; }
    static ValidationResult reject(RejectReason r) { return {false, r}; }
};

enum class LedgerErrc { AlreadyExists, UnknownAddress };

class LedgerError : public std::runtime_error {
public:
    LedgerError(LedgerErrc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    LedgerErrc code() const { return code_; }

private:
    LedgerErrc code_;
};

// Balances and sequence numbers. Single writer: only the commit pipeline may
// call apply_txn; reads take value snapshots.
class LedgerState final : public vm::StateView {
public:
    // Fails with AlreadyExists if the address is taken.
    void create_account(const Address& address);

    // Fails with UnknownAddress if the account does not exist. Mint is the
    // only operation that changes the total supply.
    void mint(const Address& address, std::uint64_t amount);

    // Accept iff the sequence number matches the sender's next, the txn has
    // not expired at `now`, and the stub auth tag verifies.
    ValidationResult validate_txn(const SignedTransaction& txn, Nanos now) const;

    struct ApplyResult {
        bool script_succeeded = false;
    };
    // Sender sequence number advances regardless of script success; the write
    // set lands atomically iff the VM reported Success. One version per txn.
    ApplyResult apply_txn(const SignedTransaction& txn, const vm::VmOutcome& outcome);

    // Snapshot of a committed account; throws UnknownAddress.
    AccountState query_account(const Address& address) const;

    bool has_account(const Address& address) const override;
    std::uint64_t balance(const Address& address) const override;

    std::uint64_t version() const { return version_; }
    std::uint64_t total_minted() const { return total_minted_; }
    std::uint64_t sum_balances() const;
    std::size_t account_count() const { return accounts_.size(); }

    // JSON map address -> {balance, sequence_number}; key order is the
    // address order, so the dump is deterministic.
    nlohmann::json dump_json() const;

    // Digest over (version, accounts in address order); equal hashes across
    // validators is the replication check.
    std::uint64_t state_hash() const;

private:
    std::map<Address, AccountState> accounts_;
    std::uint64_t version_ = 0;
    std::uint64_t total_minted_ = 0;
};

}  // namespace chainbench
