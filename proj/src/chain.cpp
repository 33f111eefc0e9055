// Copyright 2026 the chainbench authors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "chainbench/chain.hpp"

#include <ostream>

#include "chainbench/vm.hpp"

namespace chainbench {

using consensus::BlockPtr;
using consensus::CoreOutput;
using consensus::Envelope;

const char* to_string(ConsensusKind kind) {
    return kind == ConsensusKind::BftChained ? "bft_chained" : "cft_leader";
}

const char* to_string(TimeMode mode) {
    return mode == TimeMode::VirtualTime ? "virtual" : "wall";
}

void validate(const ChainConfig& cfg) {
    if (cfg.num_validators < 1) throw ConfigError("num_validators must be >= 1");
    if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (cfg.mempool_capacity < 1) throw ConfigError("mempool_capacity must be >= 1");
    if (cfg.cost.min_block_interval_ns < 1)
        throw ConfigError("cost.min_block_interval_ns must be >= 1");
    validate(cfg.net);
}

nlohmann::json to_json(const ChainConfig& cfg) {
    return {{"num_validators", cfg.num_validators},
            {"consensus", to_string(cfg.consensus)},
            {"batch_size", cfg.batch_size},
            {"mode", to_string(cfg.mode)},
            {"mempool_capacity", cfg.mempool_capacity},
            {"net",
             {{"base_latency_ns", cfg.net.base_latency},
              {"jitter_ns", cfg.net.jitter},
              {"drop_rate", cfg.net.drop_rate},
              {"seed", cfg.net.seed}}},
            {"cost",
             {{"validate_ns", cfg.cost.validate_ns},
              {"step_ns", cfg.cost.step_ns},
              {"write_ns", cfg.cost.write_ns},
              {"vote_ns", cfg.cost.vote_ns},
              {"proposal_fixed_ns", cfg.cost.proposal_fixed_ns},
              {"propose_fixed_ns", cfg.cost.propose_fixed_ns},
              {"send_overhead_ns", cfg.cost.send_overhead_ns},
              {"gossip_ns", cfg.cost.gossip_ns},
              {"mempool_scan_ns", cfg.cost.mempool_scan_ns},
              {"min_block_interval_ns", cfg.cost.min_block_interval_ns}}}};
}

std::uint64_t config_hash(const ChainConfig& cfg) {
    const std::string dump = to_json(cfg).dump();
    Fnv1a h;
    h.update(dump.data(), dump.size());
    return h.digest();
}

namespace detail {

ValidatorNode::ValidatorNode(int index, const ChainConfig& cfg, const LedgerState& genesis,
                             Nanos start_time, bool record_commits)
    : index_(index),
      cfg_(cfg),
      record_commits_(record_commits),
      core_(consensus::make_core(cfg.consensus == ConsensusKind::BftChained, index,
                                 cfg.num_validators, cfg.net.base_latency, start_time)),
      ledger_(genesis) {}

ValidatorNode::PushResult ValidatorNode::push_txn(const SignedTransaction& txn) {
    const auto key = std::make_pair(txn.sender, txn.sequence_number);
    if (seen_.contains(key)) return PushResult::Duplicate;
    if (mempool_.size() >= static_cast<std::size_t>(cfg_.mempool_capacity))
        return PushResult::Full;
    seen_.insert(key);
    mempool_.push_back(txn);
    return PushResult::Ok;
}

std::vector<SignedTransaction> ValidatorNode::pull_batch(Nanos now, std::size_t& scanned) {
    std::set<std::pair<Address, std::uint64_t>> in_flight;
    core_->for_each_pending_txn([&in_flight](const Address& sender, std::uint64_t seq) {
        in_flight.emplace(sender, seq);
    });

    std::vector<SignedTransaction> batch;
    std::deque<SignedTransaction> keep;
    while (!mempool_.empty()) {
        SignedTransaction txn = std::move(mempool_.front());
        mempool_.pop_front();
        ++scanned;
        const auto committed_seq = ledger_.has_account(txn.sender)
                                       ? ledger_.query_account(txn.sender).sequence_number
                                       : 0;
        if (txn.sequence_number < committed_seq) continue;  // already committed
        if (txn.expiration <= now) continue;                // expired, drop
        if (batch.size() < static_cast<std::size_t>(cfg_.batch_size) &&
            !in_flight.contains({txn.sender, txn.sequence_number}))
            batch.push_back(txn);
        keep.push_back(std::move(txn));
        // Taken txns stay queued until committed; a proposal can die on a
        // fork, and the branch walk above keeps them out of the next batch.
        if (batch.size() == static_cast<std::size_t>(cfg_.batch_size) &&
            mempool_.size() + keep.size() > 4 * static_cast<std::size_t>(cfg_.batch_size))
            break;  // deep queue: stop scanning once the batch is full
    }
    while (!mempool_.empty()) {
        keep.push_back(std::move(mempool_.front()));
        mempool_.pop_front();
    }
    mempool_ = std::move(keep);
    return batch;
}

Nanos ValidatorNode::apply_commits(const std::vector<BlockPtr>& blocks, Nanos now,
                                   std::size_t& commits) {
    Nanos cost = 0;
    for (const BlockPtr& block : blocks) {
        ++commits;
        committed_sequence_.emplace_back(committed_sequence_.size() + 1, block->id);
        for (const auto& txn : block->payload) {
            const auto verdict = ledger_.validate_txn(txn, block->timestamp);
            if (!verdict.accepted) {
                ++skipped_txns_;
                cost += cfg_.cost.validate_ns;
                continue;
            }
            const auto program = vm::compile(txn.script);
            const auto outcome = vm::execute(program, txn.sender, ledger_, txn.max_steps);
            const auto applied = ledger_.apply_txn(txn, outcome);
            cost += static_cast<Nanos>(outcome.steps_used) * cfg_.cost.step_ns +
                    static_cast<Nanos>(outcome.write_set.size()) * cfg_.cost.write_ns;
            ++committed_txns_;
            if (!applied.script_succeeded) ++aborted_scripts_;
            if (record_commits_)
                commit_log_.push_back(
                    {now, txn.sender, txn.sequence_number, applied.script_succeeded});
        }
    }
    return cost;
}

ValidatorNode::ProcessResult ValidatorNode::on_envelope(const Envelope& env, Nanos now) {
    ProcessResult result;
    if (const auto* gossip = std::get_if<consensus::TxnGossipMsg>(&env.msg)) {
        for (const auto& txn : gossip->txns) push_txn(txn);  // best effort
        result.cost = cfg_.cost.gossip_ns * static_cast<Nanos>(gossip->txns.size());
        return result;
    }

    CoreOutput out = core_->on_message(env, now);
    switch (env.msg.index()) {
        case 0:  // proposal
        case 4:  // cft append
            result.cost += cfg_.cost.proposal_fixed_ns;
            break;
        default:
            result.cost += cfg_.cost.vote_ns;
            break;
    }
    result.cost += cfg_.cost.validate_ns * static_cast<Nanos>(out.adopted_txns);
    result.cost += apply_commits(out.committed, now, result.commits);
    result.outbound = std::move(out.outbound);
    return result;
}

ValidatorNode::ProcessResult ValidatorNode::on_timer(std::uint64_t timer_id, Nanos now) {
    ProcessResult result;
    CoreOutput out = core_->on_timer(timer_id, now);
    result.cost = cfg_.cost.vote_ns;
    result.cost += apply_commits(out.committed, now, result.commits);
    result.outbound = std::move(out.outbound);
    return result;
}

ValidatorNode::ProcessResult ValidatorNode::on_propose_tick(Nanos now) {
    ProcessResult result;
    tick_pending = false;
    if (!core_->wants_propose()) return result;
    last_propose = now;  // attempts pace retries even when the batch is empty

    std::size_t scanned = 0;
    std::vector<SignedTransaction> batch = pull_batch(now, scanned);
    result.cost += cfg_.cost.mempool_scan_ns * static_cast<Nanos>(scanned);
    if (batch.empty() && core_->requires_batch()) return result;

    CoreOutput out = core_->propose(std::move(batch), now);
    result.cost += cfg_.cost.propose_fixed_ns;
    result.cost += cfg_.cost.validate_ns * static_cast<Nanos>(out.adopted_txns);
    result.cost += apply_commits(out.committed, now, result.commits);
    result.outbound = std::move(out.outbound);
    return result;
}

bool ValidatorNode::wants_propose_now() const {
    if (!core_->wants_propose()) return false;
    if (core_->requires_batch() && mempool_.empty()) return false;
    return true;
}

std::optional<consensus::ConsensusCore::TimerReq> ValidatorNode::pending_timer() const {
    return core_->pending_timer();
}

}  // namespace detail

// --- SimChain ---------------------------------------------------------------

SimChain::SimChain(const ChainConfig& cfg) : cfg_(cfg), net_(cfg.net) { validate(cfg_); }

SimChain::~SimChain() = default;

void SimChain::trace_line(int validator, const char* kind, std::uint64_t round) {
    if (!trace_) return;
    nlohmann::json line = {
        {"t", now_}, {"validator", validator}, {"kind", kind}, {"round", round}};
    (*trace_) << line.dump() << '\n';
}

void SimChain::start() {
    if (started_) return;
    started_ = true;
    for (int i = 0; i < cfg_.num_validators; ++i)
        nodes_.push_back(std::make_unique<detail::ValidatorNode>(i, cfg_, genesis_, now_,
                                                                 /*record_commits=*/i == 0));
    for (int i = 0; i < cfg_.num_validators; ++i) sync_node(i);
}

void SimChain::push_event(Event ev) {
    ev.seq = event_seq_++;
    queue_.push(std::move(ev));
}

void SimChain::sync_node(int validator) {
    auto& node = *nodes_[static_cast<std::size_t>(validator)];
    const auto timer = node.pending_timer();
    if (timer && timer != node.armed_timer) {
        Event ev;
        ev.t = timer->deadline;
        ev.kind = Event::Kind::Timer;
        ev.dest = validator;
        ev.timer_id = timer->id;
        push_event(std::move(ev));
        node.armed_timer = timer;
    }
    if (node.wants_propose_now() && !node.tick_pending) {
        Event ev;
        ev.t = std::max({now_, node.busy_until,
                         node.last_propose + cfg_.cost.min_block_interval_ns});
        ev.kind = Event::Kind::ProposeTick;
        ev.dest = validator;
        push_event(std::move(ev));
        node.tick_pending = true;
    }
}

void SimChain::dispatch(int validator, detail::ValidatorNode::ProcessResult&& result) {
    auto& node = *nodes_[static_cast<std::size_t>(validator)];
    const Nanos start = std::max(now_, node.busy_until);
    Nanos send_at = start + result.cost;
    node.busy_until = send_at;
    for (auto& env : result.outbound) {
        send_at += cfg_.cost.send_overhead_ns;
        node.busy_until = send_at;
        const auto decision = net_.schedule(send_at);
        if (decision.dropped) continue;
        Event ev;
        ev.t = decision.deliver_at;
        ev.kind = Event::Kind::Deliver;
        ev.dest = env.to;
        ev.env = std::move(env);
        push_event(std::move(ev));
    }
    if (result.commits > 0) trace_line(validator, "commit", node.core().committed_height());
    sync_node(validator);
}

bool SimChain::step() {
    if (queue_.empty()) return false;
    Event ev = queue_.top();
    queue_.pop();
    // Strictly increasing clock: every event gets a unique timestamp, so a
    // commit record never shares an instant with a later observation.
    now_ = std::max(now_ + 1, ev.t);
    switch (ev.kind) {
        case Event::Kind::Deliver: {
            const int v = ev.dest;
            trace_line(v, consensus::message_kind(ev.env.msg),
                       nodes_[static_cast<std::size_t>(v)]->core().current_round());
            dispatch(v, nodes_[static_cast<std::size_t>(v)]->on_envelope(ev.env, now_));
            break;
        }
        case Event::Kind::Timer: {
            const int v = ev.dest;
            auto& node = *nodes_[static_cast<std::size_t>(v)];
            if (node.armed_timer && node.armed_timer->id == ev.timer_id)
                node.armed_timer.reset();  // fired; allow re-arming
            trace_line(v, "timeout", node.core().current_round());
            dispatch(v, node.on_timer(ev.timer_id, now_));
            break;
        }
        case Event::Kind::ProposeTick: {
            const int v = ev.dest;
            trace_line(v, "propose", nodes_[static_cast<std::size_t>(v)]->core().current_round());
            dispatch(v, nodes_[static_cast<std::size_t>(v)]->on_propose_tick(now_));
            break;
        }
        case Event::Kind::Callback:
            ev.fn();
            break;
    }
    return true;
}

bool SimChain::run_while(const std::function<bool()>& pred, Nanos deadline) {
    while (pred()) {
        if (now_ > deadline) return false;
        if (!step()) return !pred();
    }
    return true;
}

void SimChain::schedule_callback(Nanos delay, std::function<void()> fn) {
    Event ev;
    ev.t = now_ + delay;
    ev.kind = Event::Kind::Callback;
    ev.fn = std::move(fn);
    push_event(std::move(ev));
}

AdmissionReceipt SimChain::submit_txn(const SignedTransaction& txn) {
    start();
    auto& gateway = *nodes_[0];
    switch (gateway.push_txn(txn)) {
        case detail::ValidatorNode::PushResult::Duplicate:
            return AdmissionReceipt::rejected(RejectReason::Duplicate);
        case detail::ValidatorNode::PushResult::Full:
            return AdmissionReceipt::rejected(RejectReason::Backpressure);
        case detail::ValidatorNode::PushResult::Ok:
            break;
    }
    // Gossip to the other validators; losses are repaired by later leaders.
    for (int v = 1; v < cfg_.num_validators; ++v) {
        const auto decision = net_.schedule(now_);
        if (decision.dropped) continue;
        Event ev;
        ev.t = decision.deliver_at;
        ev.kind = Event::Kind::Deliver;
        ev.dest = v;
        ev.env = Envelope{-1, v, consensus::TxnGossipMsg{{txn}}};
        push_event(std::move(ev));
    }
    sync_node(0);
    return AdmissionReceipt::ok();
}

AccountState SimChain::query_account(const Address& address) {
    if (!started_) return genesis_.query_account(address);
    return nodes_[0]->ledger().query_account(address);
}

void SimChain::create_account(const Address& address) {
    if (started_) throw RunError("create_account after submissions started");
    genesis_.create_account(address);
}

void SimChain::mint(const Address& address, std::uint64_t amount) {
    if (started_) throw RunError("mint after submissions started");
    genesis_.mint(address, amount);
}

NetworkInfo SimChain::network_info() {
    return NetworkInfo{cfg_.num_validators, cfg_.consensus, cfg_.mode, now_};
}

std::optional<RunCounters> SimChain::counters() {
    return RunCounters{committed_txns(), aborted_scripts(), skipped_txns()};
}

const std::vector<CommitRecord>& SimChain::commit_log() const {
    static const std::vector<CommitRecord> empty;
    return nodes_.empty() ? empty : nodes_[0]->commit_log();
}

const std::vector<std::pair<std::uint64_t, consensus::BlockId>>& SimChain::committed_sequence(
    int validator) const {
    return nodes_.at(static_cast<std::size_t>(validator))->committed_sequence();
}

std::uint64_t SimChain::state_hash(int validator) const {
    return nodes_.empty() ? genesis_.state_hash()
                          : nodes_.at(static_cast<std::size_t>(validator))->ledger().state_hash();
}

nlohmann::json SimChain::dump_state(int validator) const {
    return nodes_.empty() ? genesis_.dump_json()
                          : nodes_.at(static_cast<std::size_t>(validator))->ledger().dump_json();
}

std::uint64_t SimChain::ledger_version(int validator) const {
    return nodes_.empty() ? 0 : nodes_.at(static_cast<std::size_t>(validator))->ledger().version();
}

std::uint64_t SimChain::committed_txns() const {
    return nodes_.empty() ? 0 : nodes_[0]->committed_txns();
}

std::uint64_t SimChain::aborted_scripts() const {
    return nodes_.empty() ? 0 : nodes_[0]->aborted_scripts();
}

std::uint64_t SimChain::skipped_txns() const {
    return nodes_.empty() ? 0 : nodes_[0]->skipped_txns();
}

bool SimChain::converged() const {
    if (nodes_.empty()) return true;
    const auto height = nodes_[0]->core().committed_height();
    const auto hash = nodes_[0]->ledger().state_hash();
    for (const auto& node : nodes_) {
        if (node->core().committed_height() != height) return false;
        if (node->ledger().state_hash() != hash) return false;
    }
    return true;
}

std::unique_ptr<TargetAdapter> spawn_network(const ChainConfig& cfg) {
    validate(cfg);
    if (cfg.mode == TimeMode::VirtualTime) return std::make_unique<SimChain>(cfg);
    return std::make_unique<WallChain>(cfg);
}

}  // namespace chainbench
