// Copyright 2026 the chainbench authors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "chainbench/ledger.hpp"

namespace chainbench {

const char* to_string(RejectReason reason) {
    switch (reason) {
        case RejectReason::UnknownSender: return "unknown_sender";
        case RejectReason::SeqGap: return "seq_gap";
        case RejectReason::Expired: return "expired";
        case RejectReason::BadAuth: return "bad_auth";
        case RejectReason::Duplicate: return "duplicate";
        case RejectReason::Backpressure: return "backpressure";
    }
    return "unknown";
}

void LedgerState::create_account(const Address& address) {
    auto [it, inserted] = accounts_.try_emplace(address, AccountState{address, 0, 0});
    if (!inserted)
        throw LedgerError(LedgerErrc::AlreadyExists,
                          "account already exists: " + address.to_hex());
}

void LedgerState::mint(const Address& address, std::uint64_t amount) {
    auto it = accounts_.find(address);
    if (it == accounts_.end())
        throw LedgerError(LedgerErrc::UnknownAddress, "unknown address: " + address.to_hex());
    it->second.balance += amount;
    total_minted_ += amount;
}

ValidationResult LedgerState::validate_txn(const SignedTransaction& txn, Nanos now) const {
    auto it = accounts_.find(txn.sender);
    if (it == accounts_.end()) return ValidationResult::reject(RejectReason::UnknownSender);
    if (txn.sequence_number != it->second.sequence_number)
        return ValidationResult::reject(RejectReason::SeqGap);
    if (txn.expiration <= now) return ValidationResult::reject(RejectReason::Expired);
    if (txn.auth_tag != compute_auth_tag(txn.sender, txn.sequence_number, txn.script))
        return ValidationResult::reject(RejectReason::BadAuth);
    return ValidationResult::accept();
}

LedgerState::ApplyResult LedgerState::apply_txn(const SignedTransaction& txn,
                                                const vm::VmOutcome& outcome) {
    auto it = accounts_.find(txn.sender);
    if (it == accounts_.end())
        throw LedgerError(LedgerErrc::UnknownAddress,
                          "apply for unknown sender: " + txn.sender.to_hex());
    it->second.sequence_number += 1;  // charged even when the script aborts

    const bool ok = outcome.status == vm::VmStatus::Success;
    if (ok) {
        for (const auto& op : outcome.write_set) {
            auto acc = accounts_.find(op.account);
            if (acc == accounts_.end())
                throw std::logic_error("write set touches unknown account");
            if (op.delta < 0) {
                const auto debit = static_cast<std::uint64_t>(-op.delta);
                if (acc->second.balance < debit)
                    throw std::logic_error("write set would drive balance negative");
                acc->second.balance -= debit;
            } else {
                acc->second.balance += static_cast<std::uint64_t>(op.delta);
            }
        }
    }
    version_ += 1;
    return ApplyResult{ok};
}

AccountState LedgerState::query_account(const Address& address) const {
    auto it = accounts_.find(address);
    if (it == accounts_.end())
        throw LedgerError(LedgerErrc::UnknownAddress, "unknown address: " + address.to_hex());
    return it->second;
}

bool LedgerState::has_account(const Address& address) const {
    return accounts_.contains(address);
}

std::uint64_t LedgerState::balance(const Address& address) const {
    return accounts_.at(address).balance;
}

std::uint64_t LedgerState::sum_balances() const {
    std::uint64_t total = 0;
    for (const auto& [addr, acc] : accounts_) total += acc.balance;
    return total;
}

nlohmann::json LedgerState::dump_json() const {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [addr, acc] : accounts_) {
        out[addr.to_hex()] = {{"balance", acc.balance},
                              {"sequence_number", acc.sequence_number}};
    }
    return out;
}

std::uint64_t LedgerState::state_hash() const {
    Fnv1a h;
    h.update_u64(version_);
    for (const auto& [addr, acc] : accounts_) {
        h.update_u64(addr.value);
        h.update_u64(acc.balance);
        h.update_u64(acc.sequence_number);
    }
    return h.digest();
}

}  // namespace chainbench
