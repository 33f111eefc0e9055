// Copyright 2026 the chainbench authors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include <doctest.h>

#include <chrono>
#include <map>
#include <sstream>
#include <thread>

#include "chainbench/chain.hpp"
#include "chainbench/rng.hpp"

using namespace chainbench;

namespace {

constexpr Nanos kRunCap = 30 * kNanosPerSecond;

ChainConfig small_config(int n, ConsensusKind kind, std::uint64_t seed) {
    ChainConfig cfg;
    cfg.num_validators = n;
    cfg.consensus = kind;
    cfg.batch_size = 10;
    cfg.net.seed = seed;
    return cfg;
}

struct TestAccounts {
    Address sender{0xa};
    Address receiver{0xb};

    void install(TargetAdapter& chain, std::uint64_t funds) const {
        chain.create_account(sender);
        chain.create_account(receiver);
        if (funds > 0) chain.mint(sender, funds);
    }
};

// Submits `count` transfers and runs the simulation until the gateway
// committed them all; returns false on timeout.
bool submit_and_commit(SimChain& chain, const TestAccounts& acc, std::uint64_t count) {
    for (std::uint64_t seq = 0; seq < count; ++seq) {
        const auto receipt = chain.submit_txn(make_signed_txn(
            acc.sender, seq, Script::transfer(acc.receiver, 1), chain.now_ns()));
        if (!receipt.admitted) return false;
    }
    return chain.run_while([&] { return chain.committed_txns() < count; }, kRunCap);
}

void check_committed_prefixes(const SimChain& chain) {
    for (int a = 0; a < chain.num_validators(); ++a) {
        for (int b = a + 1; b < chain.num_validators(); ++b) {
            const auto& ca = chain.committed_sequence(a);
            const auto& cb = chain.committed_sequence(b);
            const std::size_t common = std::min(ca.size(), cb.size());
            for (std::size_t h = 0; h < common; ++h) {
                REQUIRE(ca[h].first == cb[h].first);
                REQUIRE(ca[h].second == cb[h].second);
            }
        }
    }
}

}  // namespace

TEST_SUITE("chain") {

TEST_CASE("spawn validates its configuration") {
    ChainConfig bad;
    bad.num_validators = 0;
    CHECK_THROWS_WITH_AS(spawn_network(bad), doctest::Contains("num_validators"), ConfigError);

    ChainConfig bad_batch;
    bad_batch.batch_size = 0;
    CHECK_THROWS_AS(spawn_network(bad_batch), ConfigError);
}

TEST_CASE("network_info echoes the config and uptime is monotone") {
    auto chain = spawn_network(small_config(4, ConsensusKind::BftChained, 1));
    const auto info = chain->network_info();
    CHECK(info.num_validators == 4);
    CHECK(info.consensus == ConsensusKind::BftChained);
    CHECK(info.mode == TimeMode::VirtualTime);
    const auto later = chain->network_info();
    CHECK(later.uptime >= info.uptime);
}

TEST_CASE("single validator degenerates to local ordering") {
    SimChain chain(small_config(1, ConsensusKind::BftChained, 2));
    TestAccounts acc;
    acc.install(chain, 100);
    REQUIRE(submit_and_commit(chain, acc, 20));
    CHECK(chain.committed_txns() == 20);
    CHECK(chain.query_account(acc.sender).sequence_number == 20);
    CHECK(chain.query_account(acc.receiver).balance == 20);
}

TEST_CASE("admission rejects duplicates and applies backpressure") {
    auto cfg = small_config(4, ConsensusKind::BftChained, 3);
    cfg.mempool_capacity = 5;
    SimChain chain(cfg);
    TestAccounts acc;
    acc.install(chain, 100);

    const auto txn = make_signed_txn(acc.sender, 0, Script::transfer(acc.receiver, 1), 0);
    CHECK(chain.submit_txn(txn).admitted);
    const auto dup = chain.submit_txn(
        make_signed_txn(acc.sender, 0, Script::do_nothing(), 0));  // same (sender, seq)
    CHECK_FALSE(dup.admitted);
    CHECK(dup.reason == RejectReason::Duplicate);

    for (std::uint64_t seq = 1; seq < 5; ++seq)
        CHECK(chain
                  .submit_txn(make_signed_txn(acc.sender, seq,
                                              Script::transfer(acc.receiver, 1), 0))
                  .admitted);
    const auto full = chain.submit_txn(
        make_signed_txn(acc.sender, 5, Script::transfer(acc.receiver, 1), 0));
    CHECK_FALSE(full.admitted);
    CHECK(full.reason == RejectReason::Backpressure);
}

TEST_CASE("account setup is rejected once submissions started") {
    SimChain chain(small_config(1, ConsensusKind::BftChained, 4));
    TestAccounts acc;
    acc.install(chain, 10);
    chain.submit_txn(make_signed_txn(acc.sender, 0, Script::do_nothing(), 0));
    CHECK_THROWS_AS(chain.mint(acc.sender, 1), RunError);
    CHECK_THROWS_AS(chain.create_account(Address{0xcc}), RunError);
}

TEST_CASE("a committed block advances every validator's ledger identically") {
    SimChain chain(small_config(4, ConsensusKind::BftChained, 5));
    TestAccounts acc;
    acc.install(chain, 100);
    REQUIRE(submit_and_commit(chain, acc, 3));
    REQUIRE(chain.run_while([&] { return !chain.converged(); },
                            chain.now_ns() + 10 * kNanosPerSecond));
    for (int v = 0; v < 4; ++v) {
        CHECK(chain.ledger_version(v) == 3);
        CHECK(chain.state_hash(v) == chain.state_hash(0));
        CHECK(chain.dump_state(v) == chain.dump_state(0));
    }
}

TEST_CASE("a transaction whose sequence number went stale is skipped and counted") {
    ChainConfig cfg = small_config(2, ConsensusKind::CftLeader, 6);
    LedgerState genesis;
    genesis.create_account(Address{0xa});
    genesis.create_account(Address{0xb});
    genesis.mint(Address{0xa}, 100);

    detail::ValidatorNode follower(1, cfg, genesis, 0, /*record_commits=*/true);
    const auto good = make_signed_txn(Address{0xa}, 0, Script::transfer(Address{0xb}, 1), 0);
    const auto stale = make_signed_txn(Address{0xa}, 0, Script::do_nothing(), 0);
    const auto block = consensus::make_block(consensus::QuorumCert{}, consensus::genesis_id(), 1,
                                             0, 0, {good, stale});
    const auto result = follower.on_envelope(
        consensus::Envelope{0, 1, consensus::CftAppendMsg{{block}, 1}}, 100);
    CHECK(result.commits == 1);
    CHECK(follower.committed_txns() == 1);
    CHECK(follower.skipped_txns() == 1);
    CHECK(follower.ledger().version() == 1);
    CHECK(follower.ledger().query_account(Address{0xa}).sequence_number == 1);
}

TEST_CASE("fault-free runs commit every admitted txn exactly once") {
    for (auto kind : {ConsensusKind::BftChained, ConsensusKind::CftLeader}) {
        CAPTURE(to_string(kind));
        SimChain chain(small_config(4, kind, 7));
        TestAccounts acc;
        acc.install(chain, 1000);
        REQUIRE(submit_and_commit(chain, acc, 50));

        std::map<std::uint64_t, int> seen;
        for (const auto& rec : chain.commit_log()) {
            CHECK(rec.sender == acc.sender);
            CHECK(rec.script_succeeded);
            seen[rec.sequence_number] += 1;
        }
        REQUIRE(seen.size() == 50);
        for (const auto& [seq, count] : seen) {
            CHECK(seq < 50);
            CHECK(count == 1);
        }
    }
}

TEST_CASE("replication and safety hold under message loss") {
    for (auto kind : {ConsensusKind::BftChained, ConsensusKind::CftLeader}) {
        for (std::uint64_t seed : {11u, 12u, 13u, 14u}) {
            CAPTURE(to_string(kind));
            CAPTURE(seed);
            auto cfg = small_config(4, kind, seed);
            cfg.net.drop_rate = 0.15;
            cfg.net.jitter = 200 * kNanosPerMicro;
            SimChain chain(cfg);
            TestAccounts acc;
            acc.install(chain, 1000);
            REQUIRE(submit_and_commit(chain, acc, 30));
            REQUIRE(chain.run_while([&] { return !chain.converged(); },
                                    chain.now_ns() + 60 * kNanosPerSecond));
            check_committed_prefixes(chain);
            for (int v = 0; v < 4; ++v) CHECK(chain.state_hash(v) == chain.state_hash(0));
            CHECK(chain.query_account(acc.receiver).balance == 30);
        }
    }
}

TEST_CASE("cft commits a batch in fewer message delays than bft") {
    // Same single-batch workload, n=4, no jitter or loss. The CFT baseline
    // needs one round trip (2 one-way hops); the chained protocol needs three
    // certified rounds before the first payload block commits (>= 4 hops).
    const Nanos latency = small_config(4, ConsensusKind::BftChained, 1).net.base_latency;
    std::map<ConsensusKind, Nanos> first_commit;
    for (auto kind : {ConsensusKind::BftChained, ConsensusKind::CftLeader}) {
        SimChain chain(small_config(4, kind, 21));
        TestAccounts acc;
        acc.install(chain, 100);
        REQUIRE(submit_and_commit(chain, acc, 5));
        REQUIRE(!chain.commit_log().empty());
        first_commit[kind] = chain.commit_log().front().t;
    }
    CHECK(first_commit[ConsensusKind::CftLeader] < 3 * latency);
    CHECK(first_commit[ConsensusKind::BftChained] >= 4 * latency);
    CHECK(first_commit[ConsensusKind::CftLeader] < first_commit[ConsensusKind::BftChained]);
}

TEST_CASE("event trace lines are well-formed json in time order") {
    SimChain chain(small_config(4, ConsensusKind::BftChained, 8));
    std::ostringstream trace;
    chain.set_trace(&trace);
    TestAccounts acc;
    acc.install(chain, 100);
    REQUIRE(submit_and_commit(chain, acc, 10));
    chain.set_trace(nullptr);

    std::istringstream in(trace.str());
    std::string line;
    Nanos last_t = 0;
    int commits = 0, proposals = 0;
    while (std::getline(in, line)) {
        const auto parsed = nlohmann::json::parse(line);
        REQUIRE(parsed.contains("t"));
        REQUIRE(parsed.contains("validator"));
        REQUIRE(parsed.contains("kind"));
        REQUIRE(parsed.contains("round"));
        const Nanos t = parsed["t"].get<Nanos>();
        CHECK(t >= last_t);
        last_t = t;
        if (parsed["kind"] == "commit") ++commits;
        if (parsed["kind"] == "propose") ++proposals;
    }
    CHECK(commits > 0);
    CHECK(proposals > 0);
}

TEST_CASE("wall clock target commits a small workload") {
    auto cfg = small_config(2, ConsensusKind::BftChained, 9);
    cfg.mode = TimeMode::WallClock;
    auto target = spawn_network(cfg);
    auto* wall = dynamic_cast<WallChain*>(target.get());
    REQUIRE(wall != nullptr);

    TestAccounts acc;
    acc.install(*target, 100);
    for (std::uint64_t seq = 0; seq < 20; ++seq)
        REQUIRE(target
                    ->submit_txn(make_signed_txn(acc.sender, seq,
                                                 Script::transfer(acc.receiver, 1),
                                                 target->now_ns()))
                    .admitted);

    const Nanos deadline = target->now_ns() + 20 * kNanosPerSecond;
    while (target->now_ns() < deadline) {
        if (target->query_account(acc.sender).sequence_number == 20) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    CHECK(target->query_account(acc.sender).sequence_number == 20);
    CHECK(target->query_account(acc.receiver).balance == 20);

    wall->drain(100 * kNanosPerMilli);
    wall->stop();
    CHECK(wall->committed_txns() == 20);
    CHECK(wall->commit_log().size() == 20);
    CHECK(wall->state_hash(0) == wall->state_hash(1));
}

}  // TEST_SUITE
