// Copyright 2026 the chainbench authors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include <doctest.h>

#include "chainbench/ledger.hpp"
#include "chainbench/rng.hpp"
#include "chainbench/vm.hpp"

using namespace chainbench;

namespace {

vm::VmOutcome run_script(const LedgerState& ledger, const Address& sender, const Script& s) {
    return vm::execute(vm::compile(s), sender, ledger, SignedTransaction::kDefaultMaxSteps);
}

}  // namespace

TEST_SUITE("ledger") {

TEST_CASE("create_account starts at zero") {
    LedgerState ledger;
    ledger.create_account(Address{0xa});
    const auto acc = ledger.query_account(Address{0xa});
    CHECK(acc.balance == 0);
    CHECK(acc.sequence_number == 0);
}

TEST_CASE("duplicate creation fails") {
    LedgerState ledger;
    ledger.create_account(Address{0xa});
    CHECK_THROWS_AS(ledger.create_account(Address{0xa}), LedgerError);
}

TEST_CASE("a 12-client pool needs 24 accounts") {
    LedgerState ledger;
    for (int client = 0; client < 12; ++client) {
        ledger.create_account(Address{0x100ull + static_cast<std::uint64_t>(client)});
        ledger.create_account(Address{0x200ull + static_cast<std::uint64_t>(client)});
    }
    CHECK(ledger.account_count() == 24);
}

TEST_CASE("mint credits the balance") {
    LedgerState ledger;
    ledger.create_account(Address{0xa});
    ledger.mint(Address{0xa}, 1'000'000'000ull);
    CHECK(ledger.query_account(Address{0xa}).balance == 1'000'000'000ull);
    CHECK(ledger.query_account(Address{0xa}).sequence_number == 0);
    CHECK(ledger.total_minted() == 1'000'000'000ull);
}

TEST_CASE("mint to an unknown address fails") {
    LedgerState ledger;
    CHECK_THROWS_AS(ledger.mint(Address{0xdead}, 1), LedgerError);
}

TEST_CASE("validation accepts a matching sequence number") {
    LedgerState ledger;
    ledger.create_account(Address{0xa});
    const auto txn = make_signed_txn(Address{0xa}, 0, Script::do_nothing(), 0);
    CHECK(ledger.validate_txn(txn, 0).accepted);
}

TEST_CASE("validation rejects sequence gaps, expiry and bad auth") {
    LedgerState ledger;
    ledger.create_account(Address{0xa});

    const auto gap = make_signed_txn(Address{0xa}, 1, Script::do_nothing(), 0);
    CHECK(ledger.validate_txn(gap, 0).reason == RejectReason::SeqGap);

    auto expired = make_signed_txn(Address{0xa}, 0, Script::do_nothing(), 0);
    CHECK(ledger.validate_txn(expired, expired.expiration).reason == RejectReason::Expired);

    auto forged = make_signed_txn(Address{0xa}, 0, Script::do_nothing(), 0);
    forged.auth_tag ^= 1;
    CHECK(ledger.validate_txn(forged, 0).reason == RejectReason::BadAuth);

    const auto stranger = make_signed_txn(Address{0xbb}, 0, Script::do_nothing(), 0);
    CHECK(ledger.validate_txn(stranger, 0).reason == RejectReason::UnknownSender);
}

TEST_CASE("apply moves balances and advances the sequence number") {
    LedgerState ledger;
    const Address a{0xa}, b{0xb};
    ledger.create_account(a);
    ledger.create_account(b);
    ledger.mint(a, 100);

    const Script s = Script::transfer(b, 10);
    const auto txn = make_signed_txn(a, 0, s, 0);
    ledger.apply_txn(txn, run_script(ledger, a, s));

    CHECK(ledger.query_account(a).balance == 90);
    CHECK(ledger.query_account(a).sequence_number == 1);
    CHECK(ledger.query_account(b).balance == 10);
    CHECK(ledger.version() == 1);
}

TEST_CASE("do_nothing only advances the sequence number") {
    LedgerState ledger;
    const Address a{0xa};
    ledger.create_account(a);
    ledger.mint(a, 100);

    const auto txn = make_signed_txn(a, 0, Script::do_nothing(), 0);
    ledger.apply_txn(txn, run_script(ledger, a, Script::do_nothing()));
    CHECK(ledger.query_account(a).balance == 100);
    CHECK(ledger.query_account(a).sequence_number == 1);
}

TEST_CASE("a replay is rejected after apply") {
    LedgerState ledger;
    const Address a{0xa};
    ledger.create_account(a);
    const auto txn = make_signed_txn(a, 0, Script::do_nothing(), 0);
    REQUIRE(ledger.validate_txn(txn, 0).accepted);
    ledger.apply_txn(txn, run_script(ledger, a, Script::do_nothing()));
    CHECK(ledger.validate_txn(txn, 0).reason == RejectReason::SeqGap);
}

TEST_CASE("an aborted script is charged but writes nothing") {
    LedgerState ledger;
    const Address a{0xa}, b{0xb};
    ledger.create_account(a);
    ledger.create_account(b);
    ledger.mint(a, 5);

    const Script s = Script::transfer(b, 50);
    const auto outcome = run_script(ledger, a, s);
    REQUIRE(outcome.status == vm::VmStatus::Aborted);
    const auto result = ledger.apply_txn(make_signed_txn(a, 0, s, 0), outcome);
    CHECK_FALSE(result.script_succeeded);
    CHECK(ledger.query_account(a).balance == 5);
    CHECK(ledger.query_account(a).sequence_number == 1);
    CHECK(ledger.version() == 1);
}

TEST_CASE("conservation holds across random committed traffic") {
    DetRng rng(0xc0ffee);
    LedgerState ledger;
    const int accounts = 6;
    std::uint64_t minted = 0;
    for (int i = 0; i < accounts; ++i) {
        ledger.create_account(Address{static_cast<std::uint64_t>(i + 1)});
        const std::uint64_t amount = rng.next_u64() % 500;
        ledger.mint(Address{static_cast<std::uint64_t>(i + 1)}, amount);
        minted += amount;
    }

    std::vector<std::uint64_t> next_seq(accounts, 0);
    for (int round = 0; round < 500; ++round) {
        const int from = static_cast<int>(rng.next_u64() % accounts);
        const int to = static_cast<int>(rng.next_u64() % accounts);
        const std::uint64_t amount = 1 + rng.next_u64() % 200;  // may abort: fine
        const Address sender{static_cast<std::uint64_t>(from + 1)};
        const Script s = (to == from) ? Script::do_nothing()
                                      : Script::transfer(Address{static_cast<std::uint64_t>(to + 1)}, amount);
        const auto txn = make_signed_txn(sender, next_seq[from], s, 0);
        REQUIRE(ledger.validate_txn(txn, 0).accepted);
        ledger.apply_txn(txn, run_script(ledger, sender, s));
        next_seq[from] += 1;

        CHECK(ledger.sum_balances() == minted);
        CHECK(ledger.total_minted() == minted);
    }

    // Sequence numbers committed without gaps, in order.
    for (int i = 0; i < accounts; ++i)
        CHECK(ledger.query_account(Address{static_cast<std::uint64_t>(i + 1)}).sequence_number ==
              next_seq[i]);
    CHECK(ledger.version() == 500);
}

TEST_CASE("queries are monotone in committed sequence numbers") {
    LedgerState ledger;
    const Address a{0xa};
    ledger.create_account(a);
    std::uint64_t last = 0;
    for (int k = 0; k < 5; ++k) {
        const auto txn = make_signed_txn(a, static_cast<std::uint64_t>(k), Script::do_nothing(), 0);
        ledger.apply_txn(txn, run_script(ledger, a, Script::do_nothing()));
        const auto seq = ledger.query_account(a).sequence_number;
        CHECK(seq >= last);
        CHECK(seq == static_cast<std::uint64_t>(k + 1));
        last = seq;
    }
}

TEST_CASE("state dump and hash are stable and content-sensitive") {
    LedgerState x, y;
    for (auto* l : {&x, &y}) {
        l->create_account(Address{0xa});
        l->create_account(Address{0xb});
        l->mint(Address{0xa}, 10);
    }
    CHECK(x.state_hash() == y.state_hash());
    CHECK(x.dump_json() == y.dump_json());

    y.mint(Address{0xb}, 1);
    CHECK(x.state_hash() != y.state_hash());

    const auto dump = x.dump_json();
    CHECK(dump["000000000000000a"]["balance"] == 10);
    CHECK(dump["000000000000000a"]["sequence_number"] == 0);
    CHECK(dump["000000000000000b"]["balance"] == 0);
}

}  // TEST_SUITE
