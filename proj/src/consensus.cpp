// Copyright 2026 the chainbench authors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "chainbench/consensus.hpp"

#include <algorithm>

namespace chainbench::consensus {

int quorum_size(int n) { return n - (n - 1) / 3; }

int cft_quorum_size(int n) { return n / 2 + 1; }

int leader_for_round(std::uint64_t round, int n) {
    return static_cast<int>(round % static_cast<std::uint64_t>(n));
}

BlockId Block::compute_id(const Block& b) {
    Fnv1a h;
    h.update_u64(b.parent_id);
    h.update_u64(b.round);
    h.update_u64(static_cast<std::uint64_t>(b.proposer));
    h.update_u64(static_cast<std::uint64_t>(b.timestamp));
    h.update_u64(b.payload.size());
    for (const auto& txn : b.payload) {
        const auto bytes = encode_txn(txn);
        h.update(bytes.data(), bytes.size());
    }
    h.update_u64(b.qc.block_id);
    h.update_u64(b.qc.round);
    for (int v : b.qc.voters) h.update_u64(static_cast<std::uint64_t>(v));
    return h.digest();
}

BlockPtr make_genesis() {
    auto b = std::make_shared<Block>();
    b->parent_id = 0;
    b->round = 0;
    b->proposer = 0;
    b->timestamp = 0;
    b->id = Block::compute_id(*b);
    return b;
}

BlockId genesis_id() {
    static const BlockId id = make_genesis()->id;
    return id;
}

QuorumCert genesis_qc() { return QuorumCert{genesis_id(), 0, {}}; }

BlockPtr make_block(const QuorumCert& qc, BlockId parent_id, std::uint64_t round, int proposer,
                    Nanos timestamp, std::vector<SignedTransaction> payload) {
    auto b = std::make_shared<Block>();
    b->parent_id = parent_id;
    b->round = round;
    b->proposer = proposer;
    b->timestamp = timestamp;
    b->payload = std::move(payload);
    b->qc = qc;
    b->id = Block::compute_id(*b);
    return b;
}

std::vector<BlockId> commit_rule(const std::map<BlockId, BlockPtr>& tree,
                                 const std::map<BlockId, QuorumCert>& qcs) {
    // Highest block heading a certified 3-chain with contiguous rounds.
    const Block* head = nullptr;
    for (const auto& [id, qc] : qcs) {
        auto b3_it = tree.find(id);
        if (b3_it == tree.end() || b3_it->second->round == 0) continue;
        const Block& b3 = *b3_it->second;
        auto b2_it = tree.find(b3.parent_id);
        if (b2_it == tree.end() || !qcs.contains(b2_it->first)) continue;
        const Block& b2 = *b2_it->second;
        if (b3.round != b2.round + 1 || b2.round == 0) continue;
        auto b1_it = tree.find(b2.parent_id);
        if (b1_it == tree.end() || !qcs.contains(b1_it->first)) continue;
        const Block& b1 = *b1_it->second;
        if (b2.round != b1.round + 1 || b1.round == 0) continue;
        if (head == nullptr || b1.round > head->round) head = &b1;
    }
    std::vector<BlockId> chain;
    if (head == nullptr) return chain;
    const Block* cur = head;
    while (cur->round > 0) {
        chain.push_back(cur->id);
        auto it = tree.find(cur->parent_id);
        if (it == tree.end()) throw std::logic_error("committed chain detached from genesis");
        cur = it->second.get();
    }
    std::reverse(chain.begin(), chain.end());
    return chain;
}

const char* message_kind(const Message& msg) {
    switch (msg.index()) {
        case 0: return "proposal";
        case 1: return "vote";
        case 2: return "new_view";
        case 3: return "txn_gossip";
        case 4: return "cft_append";
        case 5: return "cft_ack";
    }
    return "unknown";
}

void CoreOutput::merge(CoreOutput&& other) {
    outbound.insert(outbound.end(), std::make_move_iterator(other.outbound.begin()),
                    std::make_move_iterator(other.outbound.end()));
    committed.insert(committed.end(), other.committed.begin(), other.committed.end());
    adopted_txns += other.adopted_txns;
}

// --- BftCore ---------------------------------------------------------------

BftCore::BftCore(int index, int n, Nanos base_latency, Nanos start_time)
    : me_(index),
      n_(n),
      quorum_(quorum_size(n)),
      timeout_base_(10 * base_latency),
      round_entered_at_(start_time) {
    auto genesis = make_genesis();
    tree_.emplace(genesis->id, genesis);
    qc_of_.emplace(genesis->id, genesis_qc());
    high_qc_ = genesis_qc();
    locked_id_ = genesis->id;
}

Nanos BftCore::timeout_span() const {
    const int exp = std::min(consecutive_timeouts_, 10);
    return timeout_base_ << exp;
}

void BftCore::enter_round(std::uint64_t round, Nanos now, bool via_qc) {
    if (round <= round_) return;
    round_ = round;
    round_entered_at_ = now;
    proposed_this_round_ = false;
    if (via_qc) consecutive_timeouts_ = 0;
}

bool BftCore::extends(BlockId descendant, BlockId ancestor) const {
    if (ancestor == genesis_id()) return true;
    const auto anc = tree_.find(ancestor);
    if (anc == tree_.end()) return false;
    const std::uint64_t floor_round = anc->second->round;
    BlockId cur = descendant;
    while (true) {
        if (cur == ancestor) return true;
        auto it = tree_.find(cur);
        if (it == tree_.end() || it->second->round <= floor_round) return false;
        cur = it->second->parent_id;
    }
}

bool BftCore::safe_to_vote(const Block& block) const {
    return block.qc.round > locked_round_ || extends(block.parent_id, locked_id_) ||
           block.parent_id == locked_id_;
}

void BftCore::adopt_qc(const QuorumCert& qc, Nanos now) {
    auto blk = tree_.find(qc.block_id);
    if (blk == tree_.end()) return;
    auto [it, inserted] = qc_of_.try_emplace(qc.block_id, qc);
    if (!inserted) return;
    if (qc.round > high_qc_.round) high_qc_ = qc;
    // A certified block locks its parent (2-chain).
    const Block& certified = *blk->second;
    if (certified.round > 0) {
        auto parent = tree_.find(certified.parent_id);
        if (parent != tree_.end() && parent->second->round > locked_round_) {
            locked_round_ = parent->second->round;
            locked_id_ = parent->first;
        }
    }
    enter_round(qc.round + 1, now, /*via_qc=*/true);
}

void BftCore::maybe_form_qc(BlockId id, Nanos now, CoreOutput& out) {
    if (qc_of_.contains(id) || qc_formed_.contains(id)) return;
    auto votes = votes_.find(id);
    if (votes == votes_.end() || static_cast<int>(votes->second.size()) < quorum_) return;
    auto blk = tree_.find(id);
    if (blk == tree_.end()) return;  // hold votes until the block arrives
    QuorumCert qc{id, blk->second->round,
                  std::vector<int>(votes->second.begin(), votes->second.end())};
    qc_formed_.insert(id);
    adopt_qc(qc, now);
    check_commits(out);
}

void BftCore::handle_vote(const VoteMsg& vote, Nanos now, CoreOutput& out) {
    votes_[vote.block_id].insert(vote.voter);
    maybe_form_qc(vote.block_id, now, out);
}

void BftCore::adopt_branch(const std::vector<BlockPtr>& branch, Nanos now, CoreOutput& out) {
    for (const BlockPtr& b : branch) {
        if (!b || tree_.contains(b->id)) continue;
        auto parent = tree_.find(b->parent_id);
        if (parent == tree_.end()) break;  // cannot link the rest either
        const Block& p = *parent->second;
        const bool qc_ok = b->parent_id == b->qc.block_id && b->qc.round == p.round &&
                           (p.round == 0 || static_cast<int>(b->qc.voters.size()) >= quorum_);
        if (!qc_ok || b->round <= p.round) break;
        if (b->proposer != leader_for_round(b->round, n_)) break;
        tree_.emplace(b->id, b);
        out.adopted_txns += b->payload.size();
        adopt_qc(b->qc, now);
        maybe_form_qc(b->id, now, out);  // votes may have arrived first
    }
}

void BftCore::check_commits(CoreOutput& out) {
    auto full = commit_rule(tree_, qc_of_);
    if (full.size() <= committed_chain_.size()) return;
    for (std::size_t i = 0; i < committed_chain_.size(); ++i) {
        if (full[i] != committed_chain_[i])
            throw std::logic_error("commit rule produced a fork");
    }
    for (std::size_t i = committed_chain_.size(); i < full.size(); ++i) {
        committed_chain_.push_back(full[i]);
        committed_ids_.insert(full[i]);
        out.committed.push_back(tree_.at(full[i]));
    }
}

std::vector<BlockPtr> BftCore::branch_of(BlockId tip) const {
    std::vector<BlockPtr> branch;
    BlockId cur = tip;
    while (cur != genesis_id()) {
        auto it = tree_.find(cur);
        if (it == tree_.end()) break;
        branch.push_back(it->second);
        cur = it->second->parent_id;
    }
    std::reverse(branch.begin(), branch.end());
    return branch;
}

CoreOutput BftCore::on_message(const Envelope& env, Nanos now) {
    CoreOutput out;
    if (const auto* proposal = std::get_if<ProposalMsg>(&env.msg)) {
        adopt_branch(proposal->branch, now, out);
        if (!proposal->branch.empty()) {
            const BlockPtr& tip = proposal->branch.back();
            if (tree_.contains(tip->id)) {
                enter_round(tip->round, now, /*via_qc=*/false);
                if (tip->round == round_ && last_voted_round_ < tip->round &&
                    safe_to_vote(*tip)) {
                    last_voted_round_ = tip->round;
                    const VoteMsg vote{tip->id, tip->round, me_};
                    const int next_leader = leader_for_round(tip->round + 1, n_);
                    if (next_leader == me_)
                        handle_vote(vote, now, out);
                    else
                        out.outbound.push_back({me_, next_leader, vote});
                }
            }
        }
    } else if (const auto* vote = std::get_if<VoteMsg>(&env.msg)) {
        handle_vote(*vote, now, out);
    } else if (const auto* nv = std::get_if<NewViewMsg>(&env.msg)) {
        adopt_branch(nv->branch, now, out);
        adopt_qc(nv->high_qc, now);
    }
    check_commits(out);
    return out;
}

CoreOutput BftCore::on_timer(std::uint64_t timer_id, Nanos now) {
    CoreOutput out;
    if (timer_id != round_) return out;  // stale timer
    consecutive_timeouts_ += 1;
    round_ += 1;
    round_entered_at_ = now;
    proposed_this_round_ = false;
    const int leader = leader_for_round(round_, n_);
    if (leader != me_)
        out.outbound.push_back({me_, leader, NewViewMsg{high_qc_, branch_of(high_qc_.block_id)}});
    return out;
}

CoreOutput BftCore::propose(std::vector<SignedTransaction> batch, Nanos now) {
    CoreOutput out;
    if (!wants_propose()) return out;
    const BlockPtr block =
        make_block(high_qc_, high_qc_.block_id, round_, me_, now, std::move(batch));
    tree_.emplace(block->id, block);
    proposed_this_round_ = true;
    out.adopted_txns += block->payload.size();

    const auto branch = branch_of(block->id);
    for (int v = 0; v < n_; ++v)
        if (v != me_) out.outbound.push_back({me_, v, ProposalMsg{branch}});

    if (last_voted_round_ < block->round && safe_to_vote(*block)) {
        last_voted_round_ = block->round;
        const VoteMsg vote{block->id, block->round, me_};
        const int next_leader = leader_for_round(block->round + 1, n_);
        if (next_leader == me_)
            handle_vote(vote, now, out);
        else
            out.outbound.push_back({me_, next_leader, vote});
    }
    check_commits(out);
    return out;
}

bool BftCore::wants_propose() const {
    return leader_for_round(round_, n_) == me_ && !proposed_this_round_;
}

std::optional<ConsensusCore::TimerReq> BftCore::pending_timer() const {
    if (n_ == 1) return std::nullopt;  // a single validator never times out
    return TimerReq{round_, round_entered_at_ + timeout_span()};
}

void BftCore::for_each_pending_txn(
    const std::function<void(const Address&, std::uint64_t)>& fn) const {
    BlockId cur = high_qc_.block_id;
    while (cur != genesis_id() && !committed_ids_.contains(cur)) {
        auto it = tree_.find(cur);
        if (it == tree_.end()) break;
        for (const auto& txn : it->second->payload) fn(txn.sender, txn.sequence_number);
        cur = it->second->parent_id;
    }
}

// --- CftCore ---------------------------------------------------------------

CftCore::CftCore(int index, int n, Nanos base_latency, Nanos start_time)
    : me_(index),
      n_(n),
      quorum_(cft_quorum_size(n)),
      heartbeat_interval_(4 * base_latency),
      match_(static_cast<std::size_t>(n), 0),
      peer_commit_(static_cast<std::size_t>(n), 0),
      last_heartbeat_(start_time) {}

CftAppendMsg CftCore::append_msg() const { return CftAppendMsg{log_, commit_index_}; }

void CftCore::recompute_commit(CoreOutput& out) {
    std::vector<std::uint64_t> sorted(match_);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const std::uint64_t candidate = sorted[static_cast<std::size_t>(quorum_ - 1)];
    if (candidate <= commit_index_) return;
    for (std::uint64_t i = commit_index_; i < candidate; ++i)
        out.committed.push_back(log_[static_cast<std::size_t>(i)]);
    commit_index_ = candidate;
    peer_commit_[0] = commit_index_;
}

CoreOutput CftCore::propose(std::vector<SignedTransaction> batch, Nanos now) {
    CoreOutput out;
    if (me_ != 0 || batch.empty()) return out;
    const BlockId parent = log_.empty() ? genesis_id() : log_.back()->id;
    log_.push_back(make_block(QuorumCert{}, parent, log_.size() + 1, 0, now, std::move(batch)));
    out.adopted_txns += log_.back()->payload.size();
    match_[0] = log_.size();
    recompute_commit(out);
    const auto msg = append_msg();
    for (int v = 1; v < n_; ++v) out.outbound.push_back({me_, v, msg});
    return out;
}

CoreOutput CftCore::leader_on_ack(const CftAckMsg& ack) {
    CoreOutput out;
    if (ack.follower <= 0 || ack.follower >= n_) return out;
    auto& match = match_[static_cast<std::size_t>(ack.follower)];
    match = std::max(match, ack.match_index);
    auto& pc = peer_commit_[static_cast<std::size_t>(ack.follower)];
    pc = std::max(pc, ack.commit_index);
    recompute_commit(out);
    return out;
}

CoreOutput CftCore::follower_on_append(const CftAppendMsg& append) {
    CoreOutput out;
    for (std::size_t i = log_.size(); i < append.log.size(); ++i) {
        log_.push_back(append.log[i]);
        out.adopted_txns += append.log[i]->payload.size();
    }
    const std::uint64_t new_commit = std::min<std::uint64_t>(append.commit_index, log_.size());
    for (std::uint64_t i = commit_index_; i < new_commit; ++i)
        out.committed.push_back(log_[static_cast<std::size_t>(i)]);
    commit_index_ = std::max(commit_index_, new_commit);
    out.outbound.push_back({me_, 0, CftAckMsg{log_.size(), commit_index_, me_}});
    return out;
}

CoreOutput CftCore::on_message(const Envelope& env, Nanos now) {
    (void)now;
    if (const auto* append = std::get_if<CftAppendMsg>(&env.msg)) {
        if (me_ != 0) return follower_on_append(*append);
    } else if (const auto* ack = std::get_if<CftAckMsg>(&env.msg)) {
        if (me_ == 0) return leader_on_ack(*ack);
    }
    return {};
}

bool CftCore::heartbeat_needed() const {
    if (me_ != 0) return false;
    for (int v = 1; v < n_; ++v) {
        if (match_[static_cast<std::size_t>(v)] < log_.size()) return true;
        if (peer_commit_[static_cast<std::size_t>(v)] < commit_index_) return true;
    }
    return false;
}

CoreOutput CftCore::on_timer(std::uint64_t timer_id, Nanos now) {
    CoreOutput out;
    if (me_ != 0 || timer_id != heartbeat_seq_) return out;
    heartbeat_seq_ += 1;
    last_heartbeat_ = now;
    const auto msg = append_msg();
    for (int v = 1; v < n_; ++v) {
        if (match_[static_cast<std::size_t>(v)] < log_.size() ||
            peer_commit_[static_cast<std::size_t>(v)] < commit_index_)
            out.outbound.push_back({me_, v, msg});
    }
    return out;
}

std::optional<ConsensusCore::TimerReq> CftCore::pending_timer() const {
    if (!heartbeat_needed()) return std::nullopt;
    return TimerReq{heartbeat_seq_, last_heartbeat_ + heartbeat_interval_};
}

void CftCore::for_each_pending_txn(
    const std::function<void(const Address&, std::uint64_t)>& fn) const {
    for (std::size_t i = static_cast<std::size_t>(commit_index_); i < log_.size(); ++i)
        for (const auto& txn : log_[i]->payload) fn(txn.sender, txn.sequence_number);
}

std::unique_ptr<ConsensusCore> make_core(bool bft, int index, int n, Nanos base_latency,
                                         Nanos start_time) {
    if (bft) return std::make_unique<BftCore>(index, n, base_latency, start_time);
    return std::make_unique<CftCore>(index, n, base_latency, start_time);
}

}  // namespace chainbench::consensus
