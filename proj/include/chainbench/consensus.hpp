// Copyright 2026 the chainbench authors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <variant>
#include <vector>

#include "chainbench/common.hpp"
#include "chainbench/script.hpp"

namespace chainbench::consensus {

using BlockId = std::uint64_t;

// 2f+1 out of n = 3f+1 (rounded up for other n).
int quorum_size(int n);
// Simple majority, leader included.
int cft_quorum_size(int n);
// Round-robin rotation.
int leader_for_round(std::uint64_t round, int n);

struct QuorumCert {
    BlockId block_id = 0;
    std::uint64_t round = 0;
    std::vector<int> voters;  // sorted

    bool operator==(const QuorumCert&) const = default;
};

struct Block {
    BlockId id = 0;
    BlockId parent_id = 0;
    std::uint64_t round = 0;
    int proposer = 0;
    Nanos timestamp = 0;  // proposer clock; expiry is checked against this
    std::vector<SignedTransaction> payload;
    QuorumCert qc;  // certifies the parent

    static BlockId compute_id(const Block& b);
};

using BlockPtr = std::shared_ptr<const Block>;

BlockPtr make_genesis();
BlockId genesis_id();
QuorumCert genesis_qc();

// Builds a block on top of the given QC and fills in its id.
BlockPtr make_block(const QuorumCert& qc, BlockId parent_id, std::uint64_t round, int proposer,
                    Nanos timestamp, std::vector<SignedTransaction> payload);

// The commit rule: a block commits when it heads a 3-chain of parent-linked
// blocks with contiguous rounds, each certified by a known QC. Returns the
// committed chain (oldest first, genesis excluded).
std::vector<BlockId> commit_rule(const std::map<BlockId, BlockPtr>& tree,
                                 const std::map<BlockId, QuorumCert>& qcs);

// --- messages ------------------------------------------------------------

// Proposals and new-view messages carry the proposer's whole branch so that a
// validator that missed earlier rounds can always reconnect; payloads are
// shared, so this is pointer-sized per block.
struct ProposalMsg {
    std::vector<BlockPtr> branch;  // ancestors first, proposed block last
};
struct VoteMsg {
    BlockId block_id = 0;
    std::uint64_t round = 0;
    int voter = 0;
};
struct NewViewMsg {
    QuorumCert high_qc;
    std::vector<BlockPtr> branch;  // branch of high_qc's block
};
struct TxnGossipMsg {
    std::vector<SignedTransaction> txns;
};
struct CftAppendMsg {
    std::vector<BlockPtr> log;  // leader's full log
    std::uint64_t commit_index = 0;
};
struct CftAckMsg {
    std::uint64_t match_index = 0;
    std::uint64_t commit_index = 0;  // follower's applied prefix
    int follower = 0;
};

using Message =
    std::variant<ProposalMsg, VoteMsg, NewViewMsg, TxnGossipMsg, CftAppendMsg, CftAckMsg>;

struct Envelope {
    int from = -1;
    int to = -1;
    Message msg;
};

const char* message_kind(const Message& msg);

// --- protocol cores -------------------------------------------------------

// Everything a handler produced: messages to send (explicit destinations,
// never to self), blocks that became committed (oldest first) and how many
// transactions were newly admitted (for the cost model).
struct CoreOutput {
    std::vector<Envelope> outbound;
    std::vector<BlockPtr> committed;
    std::uint64_t adopted_txns = 0;

    void merge(CoreOutput&& other);
};

// Pure state machine driven by delivered events; all effects flow through the
// returned CoreOutput. One instance per validator, single-threaded.
class ConsensusCore {
public:
    virtual ~ConsensusCore() = default;

    virtual CoreOutput on_message(const Envelope& env, Nanos now) = 0;
    virtual CoreOutput on_timer(std::uint64_t timer_id, Nanos now) = 0;
    virtual CoreOutput propose(std::vector<SignedTransaction> batch, Nanos now) = 0;

    virtual bool wants_propose() const = 0;
    virtual bool requires_batch() const = 0;

    struct TimerReq {
        std::uint64_t id = 0;
        Nanos deadline = 0;
        bool operator==(const TimerReq&) const = default;
    };
    virtual std::optional<TimerReq> pending_timer() const = 0;

    virtual std::uint64_t current_round() const = 0;
    virtual std::uint64_t committed_height() const = 0;

    // Visits (sender, sequence_number) of txns sitting in the uncommitted
    // chain the next proposal would extend; used for mempool dedup.
    virtual void for_each_pending_txn(
        const std::function<void(const Address&, std::uint64_t)>& fn) const = 0;
};

// Chained-BFT core: round-robin leaders, vote-once-per-round, 2-chain locking
// and the 3-chain contiguous commit rule above. Round timeout starts at
// 10 x base latency and doubles per consecutive timeout, resetting on QC.
class BftCore final : public ConsensusCore {
public:
    BftCore(int index, int n, Nanos base_latency, Nanos start_time);

    CoreOutput on_message(const Envelope& env, Nanos now) override;
    CoreOutput on_timer(std::uint64_t timer_id, Nanos now) override;
    CoreOutput propose(std::vector<SignedTransaction> batch, Nanos now) override;

    bool wants_propose() const override;
    bool requires_batch() const override { return false; }
    std::optional<TimerReq> pending_timer() const override;
    std::uint64_t current_round() const override { return round_; }
    std::uint64_t committed_height() const override { return committed_ids_.size(); }
    void for_each_pending_txn(
        const std::function<void(const Address&, std::uint64_t)>& fn) const override;

    const QuorumCert& high_qc() const { return high_qc_; }
    std::uint64_t locked_round() const { return locked_round_; }
    std::size_t tree_size() const { return tree_.size(); }
    const std::vector<BlockId>& committed_chain() const { return committed_chain_; }

private:
    void enter_round(std::uint64_t round, Nanos now, bool via_qc);
    // Inserts unseen blocks of a branch (validating linkage, rounds, leader and
    // quorum) and adopts their QCs; updates out.adopted_txns.
    void adopt_branch(const std::vector<BlockPtr>& branch, Nanos now, CoreOutput& out);
    void adopt_qc(const QuorumCert& qc, Nanos now);
    void check_commits(CoreOutput& out);
    void maybe_form_qc(BlockId id, Nanos now, CoreOutput& out);
    void handle_vote(const VoteMsg& vote, Nanos now, CoreOutput& out);
    bool extends(BlockId descendant, BlockId ancestor) const;
    bool safe_to_vote(const Block& block) const;
    std::vector<BlockPtr> branch_of(BlockId tip) const;
    Nanos timeout_span() const;

    int me_;
    int n_;
    int quorum_;
    Nanos timeout_base_;

    std::uint64_t round_ = 1;
    Nanos round_entered_at_ = 0;
    int consecutive_timeouts_ = 0;
    bool proposed_this_round_ = false;
    std::uint64_t last_voted_round_ = 0;

    QuorumCert high_qc_;
    BlockId locked_id_;
    std::uint64_t locked_round_ = 0;

    std::map<BlockId, BlockPtr> tree_;
    std::map<BlockId, QuorumCert> qc_of_;
    std::map<BlockId, std::set<int>> votes_;
    std::set<BlockId> qc_formed_;

    std::set<BlockId> committed_ids_;
    std::vector<BlockId> committed_chain_;
};

// Crash-fault baseline: one fixed leader replicating a log; an entry commits
// once a majority (leader included) acknowledged it. No elections, no log
// repair; heartbeats retransmit until every follower caught up.
class CftCore final : public ConsensusCore {
public:
    CftCore(int index, int n, Nanos base_latency, Nanos start_time);

    CoreOutput on_message(const Envelope& env, Nanos now) override;
    CoreOutput on_timer(std::uint64_t timer_id, Nanos now) override;
    CoreOutput propose(std::vector<SignedTransaction> batch, Nanos now) override;

    bool wants_propose() const override { return me_ == 0; }
    bool requires_batch() const override { return true; }
    std::optional<TimerReq> pending_timer() const override;
    std::uint64_t current_round() const override { return log_.size(); }
    std::uint64_t committed_height() const override { return commit_index_; }
    void for_each_pending_txn(
        const std::function<void(const Address&, std::uint64_t)>& fn) const override;

    const std::vector<BlockPtr>& log() const { return log_; }

private:
    CoreOutput leader_on_ack(const CftAckMsg& ack);
    CoreOutput follower_on_append(const CftAppendMsg& append);
    void recompute_commit(CoreOutput& out);
    CftAppendMsg append_msg() const;
    bool heartbeat_needed() const;

    int me_;
    int n_;
    int quorum_;
    Nanos heartbeat_interval_;

    std::vector<BlockPtr> log_;
    std::uint64_t commit_index_ = 0;  // entries [0, commit_index_) are committed

    // Leader-side bookkeeping.
    std::vector<std::uint64_t> match_;      // highest replicated index per peer
    std::vector<std::uint64_t> peer_commit_;  // follower's acknowledged commit prefix
    std::uint64_t heartbeat_seq_ = 0;
    Nanos last_heartbeat_ = 0;
};

std::unique_ptr<ConsensusCore> make_core(bool bft, int index, int n, Nanos base_latency,
                                         Nanos start_time);

}  // namespace chainbench::consensus
