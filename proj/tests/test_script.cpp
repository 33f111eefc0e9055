// Copyright 2026 the chainbench authors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include <doctest.h>

#include "chainbench/ledger.hpp"
#include "chainbench/rng.hpp"
#include "chainbench/script.hpp"
#include "chainbench/vm.hpp"

using namespace chainbench;

namespace {

SignedTransaction random_txn(DetRng& rng) {
    SignedTransaction t;
    t.sender = Address{rng.next_u64()};
    t.sequence_number = rng.next_u64() % 100000;
    switch (rng.next_u64() % 3) {
        case 0: t.script = Script::transfer(Address{rng.next_u64()}, 1 + rng.next_u64() % 1000); break;
        case 1: t.script = Script::do_nothing(); break;
        default: t.script = Script::vm_heavy(rng.next_u64() % 2000); break;
    }
    t.expiration = static_cast<Nanos>(rng.next_u64() % 1000000000);
    t.max_steps = 1 + rng.next_u64() % 1000000;
    t.auth_tag = compute_auth_tag(t.sender, t.sequence_number, t.script);
    return t;
}

}  // namespace

TEST_SUITE("scripts") {

TEST_CASE("make_transfer echoes its parameters") {
    const Address payee{0xb};
    const Script s = Script::transfer(payee, 10);
    CHECK(s.kind() == ScriptKind::Transfer);
    CHECK(s.payee() == payee);
    CHECK(s.amount() == 10);
}

TEST_CASE("make_transfer rejects a zero amount") {
    CHECK_THROWS_AS(Script::transfer(Address{0xb}, 0), ConfigError);
}

TEST_CASE("transfer of the whole balance moves it end to end") {
    LedgerState ledger;
    const Address a{0xa}, b{0xb};
    ledger.create_account(a);
    ledger.create_account(b);
    ledger.mint(a, 1);

    const Script s = Script::transfer(b, 1);
    const auto outcome = vm::execute(vm::compile(s), a, ledger, 1000);
    REQUIRE(outcome.status == vm::VmStatus::Success);

    const auto txn = make_signed_txn(a, 0, s, 0);
    ledger.apply_txn(txn, outcome);
    CHECK(ledger.query_account(a).balance == 0);
    CHECK(ledger.query_account(b).balance == 1);
}

TEST_CASE("make_do_nothing produces the trivial script") {
    const Script s = Script::do_nothing();
    CHECK(s.kind() == ScriptKind::DoNothing);

    LedgerState empty;
    const auto outcome = vm::execute(vm::compile(s), Address{1}, empty, 10);
    CHECK(outcome.status == vm::VmStatus::Success);
    CHECK(outcome.write_set.empty());
}

TEST_CASE("do_nothing is cheaper than a transfer") {
    LedgerState ledger;
    const Address a{0xa}, b{0xb};
    ledger.create_account(a);
    ledger.create_account(b);
    ledger.mint(a, 100);

    const auto nothing = vm::execute(vm::compile(Script::do_nothing()), a, ledger, 1000);
    const auto transfer =
        vm::execute(vm::compile(Script::transfer(b, 1)), a, ledger, 1000);
    CHECK(nothing.steps_used < transfer.steps_used);
}

TEST_CASE("make_vm_heavy carries the iteration bound") {
    CHECK(Script::vm_heavy(1000).iterations() == 1000);
    CHECK(Script::vm_heavy(0).iterations() == 0);
}

TEST_CASE("vm_heavy cost rises strictly with iterations") {
    LedgerState empty;
    std::uint64_t prev = 0;
    for (std::uint64_t n : {1ull, 10ull, 100ull, 1000ull}) {
        const auto out =
            vm::execute(vm::compile(Script::vm_heavy(n)), Address{1}, empty, 1'000'000);
        REQUIRE(out.status == vm::VmStatus::Success);
        CHECK(out.steps_used > prev);
        prev = out.steps_used;
    }
}

TEST_CASE("txn encoding round-trips and is canonical") {
    DetRng rng(0x5eed);
    for (int i = 0; i < 300; ++i) {
        const SignedTransaction t = random_txn(rng);
        const auto bytes = encode_txn(t);
        CHECK(encode_txn(t) == bytes);  // deterministic
        const SignedTransaction back = decode_txn(bytes);
        CHECK(back == t);
        CHECK(encode_txn(back) == bytes);
    }
}

TEST_CASE("txn encoding layout is stable") {
    SignedTransaction t;
    t.sender = Address{0x01};
    t.sequence_number = 7;
    t.script = Script::do_nothing();
    t.expiration = 1000;
    t.max_steps = 50;
    t.auth_tag = compute_auth_tag(t.sender, t.sequence_number, t.script);

    const auto bytes = encode_txn(t);
    // sender u64 | seq u64 | script blob (u32 len + kind byte) | expiration
    // i64 | max_steps u64 | auth u64
    REQUIRE(bytes.size() == 45);
    CHECK(bytes[0] == 0x01);                    // sender LE
    CHECK(bytes[8] == 0x07);                    // sequence number LE
    CHECK(bytes[16] == 0x01);                   // script length prefix = 1
    CHECK(bytes[20] == 0x01);                   // DoNothing kind byte
    CHECK(bytes[21] == 0xe8);                   // expiration 1000 = 0x3e8 LE
    CHECK(bytes[22] == 0x03);
    CHECK(bytes[29] == 50);                     // max_steps LE
}

TEST_CASE("truncated and malformed bytes fail to decode") {
    const auto bytes = encode_txn(make_signed_txn(Address{1}, 0, Script::do_nothing(), 0));
    for (std::size_t cut : {0u, 5u, 20u, 40u}) {
        const std::vector<std::uint8_t> trunc(bytes.begin(), bytes.begin() + cut);
        CHECK_THROWS_AS(decode_txn(trunc), DecodeError);
    }

    auto trailing = bytes;
    trailing.push_back(0);
    CHECK_THROWS_AS(decode_txn(trailing), DecodeError);

    auto bad_kind = bytes;
    bad_kind[20] = 0x9f;
    try {
        decode_txn(bad_kind);
        FAIL("expected DecodeError");
    } catch (const DecodeError& e) {
        CHECK(e.offset() == 0);  // offset within the script blob
    }
}

TEST_CASE("auth tag binds sender, sequence number and script") {
    const auto base = compute_auth_tag(Address{1}, 0, Script::do_nothing());
    CHECK(base == compute_auth_tag(Address{1}, 0, Script::do_nothing()));
    CHECK(base != compute_auth_tag(Address{2}, 0, Script::do_nothing()));
    CHECK(base != compute_auth_tag(Address{1}, 1, Script::do_nothing()));
    CHECK(base != compute_auth_tag(Address{1}, 0, Script::vm_heavy(3)));
}

}  // TEST_SUITE
