// Copyright 2026 the chainbench authors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <deque>
#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <vector>

#include "chainbench/consensus.hpp"
#include "chainbench/ledger.hpp"
#include "chainbench/simnet.hpp"

namespace chainbench {

enum class ConsensusKind : std::uint8_t { BftChained, CftLeader };
enum class TimeMode : std::uint8_t { VirtualTime, WallClock };

const char* to_string(ConsensusKind kind);
const char* to_string(TimeMode mode);

// Virtual-time processing costs. Only the simulated (VirtualTime) target uses
// these; in WallClock mode real compute takes real time.
struct CostModel {
    Nanos validate_ns = 400;          // admission/validation per txn
    Nanos step_ns = 10;               // per VM step at commit
    Nanos write_ns = 400;             // per write-set entry (storage)
    Nanos vote_ns = 2'000;            // handling a vote/ack/new-view
    Nanos proposal_fixed_ns = 20'000;  // fixed per received proposal/append
    Nanos propose_fixed_ns = 50'000;   // fixed per proposal assembly
    Nanos send_overhead_ns = 30'000;   // per outbound message at the sender
    Nanos gossip_ns = 100;            // mempool insert per gossiped txn
    Nanos mempool_scan_ns = 5;        // per scanned mempool entry at proposal
    Nanos min_block_interval_ns = 500'000;  // proposal pacing
};

struct ChainConfig {
    int num_validators = 4;
    ConsensusKind consensus = ConsensusKind::BftChained;
    int batch_size = 500;
    TimeMode mode = TimeMode::VirtualTime;
    NetConfig net;
    int mempool_capacity = 100'000;
    CostModel cost;
};

// Throws ConfigError naming the offending field.
void validate(const ChainConfig& cfg);

nlohmann::json to_json(const ChainConfig& cfg);
std::uint64_t config_hash(const ChainConfig& cfg);

struct NetworkInfo {
    int num_validators = 0;
    ConsensusKind consensus = ConsensusKind::BftChained;
    TimeMode mode = TimeMode::VirtualTime;
    Nanos uptime = 0;
};

struct AdmissionReceipt {
    bool admitted = false;
    RejectReason reason = RejectReason::Duplicate;  // meaningful iff !admitted

    static AdmissionReceipt ok() { return {true, RejectReason::Duplicate}; }
    static AdmissionReceipt rejected(RejectReason r) { return {false, r}; }
};

// One committed transaction, as recorded at the gateway validator.
struct CommitRecord {
    Nanos t = 0;
    Address sender{};
    std::uint64_t sequence_number = 0;
    bool script_succeeded = false;
};

struct RunCounters {
    std::uint64_t committed = 0;
    std::uint64_t aborted = 0;
    std::uint64_t skipped = 0;
};

// The only surface the benchmark engine touches. Account setup is a genesis
// operation: create_account/mint throw RunError once submissions started.
class TargetAdapter {
public:
    virtual ~TargetAdapter() = default;

    virtual AdmissionReceipt submit_txn(const SignedTransaction& txn) = 0;
    virtual AccountState query_account(const Address& address) = 0;
    virtual void create_account(const Address& address) = 0;
    virtual void mint(const Address& address, std::uint64_t amount) = 0;
    virtual NetworkInfo network_info() = 0;

    // The clock observations are recorded against: virtual time for the
    // simulated target, a monotonic clock otherwise.
    virtual Nanos now_ns() = 0;

    // Commit-pipeline counters, when the target can report them.
    virtual std::optional<RunCounters> counters() { return std::nullopt; }
};

namespace detail {

// Mempool + consensus core + ledger + commit pipeline of one validator.
// Owned by the event loop (virtual) or by a dedicated thread (wall clock).
class ValidatorNode {
public:
    ValidatorNode(int index, const ChainConfig& cfg, const LedgerState& genesis,
                  Nanos start_time, bool record_commits);

    enum class PushResult { Ok, Duplicate, Full };
    PushResult push_txn(const SignedTransaction& txn);

    struct ProcessResult {
        Nanos cost = 0;
        std::vector<consensus::Envelope> outbound;
        std::size_t commits = 0;
    };
    ProcessResult on_envelope(const consensus::Envelope& env, Nanos now);
    ProcessResult on_timer(std::uint64_t timer_id, Nanos now);
    ProcessResult on_propose_tick(Nanos now);

    bool wants_propose_now() const;
    std::optional<consensus::ConsensusCore::TimerReq> pending_timer() const;

    int index() const { return index_; }
    const LedgerState& ledger() const { return ledger_; }
    const consensus::ConsensusCore& core() const { return *core_; }
    const std::vector<CommitRecord>& commit_log() const { return commit_log_; }
    const std::vector<std::pair<std::uint64_t, consensus::BlockId>>& committed_sequence() const {
        return committed_sequence_;
    }
    std::uint64_t committed_txns() const { return committed_txns_; }
    std::uint64_t aborted_scripts() const { return aborted_scripts_; }
    std::uint64_t skipped_txns() const { return skipped_txns_; }
    std::size_t mempool_size() const { return mempool_.size(); }

    // Event-loop bookkeeping (virtual mode).
    Nanos busy_until = 0;
    Nanos last_propose = std::numeric_limits<Nanos>::min() / 2;
    bool tick_pending = false;
    std::optional<consensus::ConsensusCore::TimerReq> armed_timer;

private:
    std::vector<SignedTransaction> pull_batch(Nanos now, std::size_t& scanned);
    Nanos apply_commits(const std::vector<consensus::BlockPtr>& blocks, Nanos now,
                        std::size_t& commits);

    int index_;
    const ChainConfig& cfg_;
    bool record_commits_;
    std::unique_ptr<consensus::ConsensusCore> core_;
    LedgerState ledger_;

    std::deque<SignedTransaction> mempool_;
    std::set<std::pair<Address, std::uint64_t>> seen_;

    std::vector<CommitRecord> commit_log_;
    std::vector<std::pair<std::uint64_t, consensus::BlockId>> committed_sequence_;
    std::uint64_t committed_txns_ = 0;
    std::uint64_t aborted_scripts_ = 0;
    std::uint64_t skipped_txns_ = 0;
};

}  // namespace detail

// Deterministic discrete-event simulation of the whole network. Single
// threaded: adapter calls enqueue work, step()/run drains it in time order.
class SimChain final : public TargetAdapter {
public:
    explicit SimChain(const ChainConfig& cfg);
    ~SimChain() override;

    AdmissionReceipt submit_txn(const SignedTransaction& txn) override;
    AccountState query_account(const Address& address) override;
    void create_account(const Address& address) override;
    void mint(const Address& address, std::uint64_t amount) override;
    NetworkInfo network_info() override;
    Nanos now_ns() override { return now_; }
    std::optional<RunCounters> counters() override;

    // Debug event trace: one JSON line per processed event.
    void set_trace(std::ostream* sink) { trace_ = sink; }

    void schedule_callback(Nanos delay, std::function<void()> fn);

    // Processes the next event; false when the queue is empty.
    bool step();
    // Runs while pred() holds and virtual time has not passed `deadline`.
    // Returns true iff pred() is false on exit (i.e. the goal was reached).
    bool run_while(const std::function<bool()>& pred, Nanos deadline);

    // Test and oracle surfaces.
    int num_validators() const { return static_cast<int>(nodes_.size()); }
    bool started() const { return started_; }
    const std::vector<CommitRecord>& commit_log() const;
    const std::vector<std::pair<std::uint64_t, consensus::BlockId>>& committed_sequence(
        int validator) const;
    std::uint64_t state_hash(int validator) const;
    nlohmann::json dump_state(int validator) const;
    std::uint64_t ledger_version(int validator) const;
    std::uint64_t committed_txns() const;
    std::uint64_t aborted_scripts() const;
    std::uint64_t skipped_txns() const;
    bool converged() const;

private:
    struct Event {
        Nanos t = 0;
        std::uint64_t seq = 0;
        enum class Kind { Deliver, Timer, ProposeTick, Callback } kind = Kind::Deliver;
        int dest = 0;
        std::uint64_t timer_id = 0;
        consensus::Envelope env;
        std::function<void()> fn;
    };
    struct EventAfter {
        bool operator()(const Event& a, const Event& b) const {
            return a.t != b.t ? a.t > b.t : a.seq > b.seq;
        }
    };

    void start();
    void push_event(Event ev);
    void dispatch(int validator, detail::ValidatorNode::ProcessResult&& result);
    void sync_node(int validator);
    void trace_line(int validator, const char* kind, std::uint64_t round);

    ChainConfig cfg_;
    NetworkModel net_;
    LedgerState genesis_;
    std::vector<std::unique_ptr<detail::ValidatorNode>> nodes_;
    std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
    Nanos now_ = 0;
    std::uint64_t event_seq_ = 0;
    bool started_ = false;
    std::ostream* trace_ = nullptr;
};

// Thread-per-validator target with real clocks: a network thread applies
// latency/jitter/drops, validator threads run the same cores and pipeline.
class WallChain final : public TargetAdapter {
public:
    explicit WallChain(const ChainConfig& cfg);
    ~WallChain() override;

    AdmissionReceipt submit_txn(const SignedTransaction& txn) override;
    AccountState query_account(const Address& address) override;
    void create_account(const Address& address) override;
    void mint(const Address& address, std::uint64_t amount) override;
    NetworkInfo network_info() override;
    Nanos now_ns() override;
    std::optional<RunCounters> counters() override;

    // Blocks until nothing new committed for `grace`; used at run teardown.
    void drain(Nanos grace);
    void stop();

    const std::vector<CommitRecord>& commit_log() const { return commit_log_; }
    std::uint64_t committed_txns() const;
    std::uint64_t aborted_scripts() const;
    std::uint64_t skipped_txns() const;
    std::uint64_t state_hash(int validator);
    nlohmann::json dump_state(int validator);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::vector<CommitRecord> commit_log_;  // filled on stop()
};

std::unique_ptr<TargetAdapter> spawn_network(const ChainConfig& cfg);

}  // namespace chainbench
