// Copyright 2026 the chainbench authors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <mutex>
#include <thread>

#include "chainbench/chain.hpp"

namespace chainbench {

using consensus::Envelope;
namespace chrono = std::chrono;

namespace {
constexpr Nanos kIdleWait = 50 * kNanosPerMilli;
}

struct WallChain::Impl {
    explicit Impl(const ChainConfig& config) : cfg(config), net(config.net) {
        epoch = chrono::steady_clock::now();
    }

    Nanos now() const {
        return chrono::duration_cast<chrono::nanoseconds>(chrono::steady_clock::now() - epoch)
            .count();
    }
    chrono::steady_clock::time_point at(Nanos t) const { return epoch + chrono::nanoseconds(t); }

    struct Slot {
        std::unique_ptr<detail::ValidatorNode> node;
        std::mutex inbox_mutex;
        std::condition_variable inbox_cv;
        std::deque<Envelope> inbox;
        std::thread thread;

        std::mutex snapshot_mutex;
        std::shared_ptr<const LedgerState> snapshot;
    };

    void publish_snapshot(Slot& slot) {
        auto copy = std::make_shared<LedgerState>(slot.node->ledger());
        std::lock_guard lk(slot.snapshot_mutex);
        slot.snapshot = std::move(copy);
    }

    // Delivery with simulated latency/jitter/drops; called from any thread.
    void send(Envelope env) {
        Nanos deliver_at;
        {
            std::lock_guard lk(net_mutex);
            const auto decision = net.schedule(now());
            if (decision.dropped) return;
            deliver_at = decision.deliver_at;
            pending.push(PendingMsg{deliver_at, net_seq++, std::move(env)});
        }
        net_cv.notify_one();
    }

    void deliver_now(Envelope env) {
        auto& slot = *slots[static_cast<std::size_t>(env.to)];
        {
            std::lock_guard lk(slot.inbox_mutex);
            slot.inbox.push_back(std::move(env));
        }
        slot.inbox_cv.notify_one();
    }

    void net_loop() {
        std::unique_lock lk(net_mutex);
        while (!stopping) {
            if (pending.empty()) {
                net_cv.wait_for(lk, chrono::nanoseconds(kIdleWait));
                continue;
            }
            const Nanos due = pending.top().at;
            if (now() < due) {
                net_cv.wait_until(lk, at(due));
                continue;
            }
            Envelope env = std::move(const_cast<PendingMsg&>(pending.top()).env);
            pending.pop();
            lk.unlock();
            deliver_now(std::move(env));
            lk.lock();
        }
    }

    void validator_loop(int index) {
        auto& slot = *slots[static_cast<std::size_t>(index)];
        auto& node = *slot.node;
        std::size_t copied_commits = 0;

        while (!stopping) {
            std::optional<Envelope> env;
            bool fire_timer = false, fire_tick = false;
            std::uint64_t timer_id = 0;
            {
                std::unique_lock lk(slot.inbox_mutex);
                if (slot.inbox.empty()) {
                    const auto timer = node.pending_timer();
                    Nanos next = now() + kIdleWait;
                    if (timer) next = std::min(next, timer->deadline);
                    if (node.wants_propose_now())
                        next = std::min(
                            next, std::max(now(), node.last_propose +
                                                      cfg.cost.min_block_interval_ns));
                    if (next > now()) slot.inbox_cv.wait_until(lk, at(next));
                }
                if (stopping) break;
                if (!slot.inbox.empty()) {
                    env = std::move(slot.inbox.front());
                    slot.inbox.pop_front();
                } else {
                    const auto timer = node.pending_timer();
                    if (timer && now() >= timer->deadline) {
                        fire_timer = true;
                        timer_id = timer->id;
                    } else if (node.wants_propose_now() &&
                               now() >= node.last_propose + cfg.cost.min_block_interval_ns) {
                        fire_tick = true;
                    }
                }
            }

            detail::ValidatorNode::ProcessResult result;
            const Nanos tnow = now();
            if (env)
                result = node.on_envelope(*env, tnow);
            else if (fire_timer)
                result = node.on_timer(timer_id, tnow);
            else if (fire_tick)
                result = node.on_propose_tick(tnow);
            else
                continue;

            for (auto& out : result.outbound) send(std::move(out));
            if (result.commits > 0) {
                publish_snapshot(slot);
                if (index == 0) {
                    const auto& log = node.commit_log();
                    std::lock_guard lk(commit_mutex);
                    for (; copied_commits < log.size(); ++copied_commits)
                        commits.push_back(log[copied_commits]);
                    committed_total.store(node.committed_txns(), std::memory_order_relaxed);
                    aborted_total.store(node.aborted_scripts(), std::memory_order_relaxed);
                    skipped_total.store(node.skipped_txns(), std::memory_order_relaxed);
                }
            }
        }
    }

    void start() {
        std::lock_guard lk(start_mutex);
        if (started) return;
        for (int i = 0; i < cfg.num_validators; ++i) {
            auto slot = std::make_unique<Slot>();
            slot->node = std::make_unique<detail::ValidatorNode>(i, cfg, genesis, now(),
                                                                 /*record_commits=*/i == 0);
            slots.push_back(std::move(slot));
        }
        for (auto& slot : slots) publish_snapshot(*slot);
        net_thread = std::thread([this] { net_loop(); });
        for (int i = 0; i < cfg.num_validators; ++i)
            slots[static_cast<std::size_t>(i)]->thread =
                std::thread([this, i] { validator_loop(i); });
        started = true;
    }

    void stop() {
        {
            std::lock_guard lk(start_mutex);
            if (!started || stopping) {
                stopping = true;
                return;
            }
            stopping = true;
        }
        net_cv.notify_all();
        for (auto& slot : slots) slot->inbox_cv.notify_all();
        for (auto& slot : slots)
            if (slot->thread.joinable()) slot->thread.join();
        if (net_thread.joinable()) net_thread.join();
    }

    ChainConfig cfg;
    chrono::steady_clock::time_point epoch;

    std::mutex start_mutex;
    std::atomic<bool> started{false};
    std::atomic<bool> stopping{false};

    LedgerState genesis;
    std::vector<std::unique_ptr<Slot>> slots;

    struct PendingMsg {
        Nanos at;
        std::uint64_t seq;
        Envelope env;
        bool operator<(const PendingMsg& other) const {
            return at != other.at ? at > other.at : seq > other.seq;  // min-heap
        }
    };
    std::mutex net_mutex;
    std::condition_variable net_cv;
    std::priority_queue<PendingMsg> pending;
    std::uint64_t net_seq = 0;
    NetworkModel net;
    std::thread net_thread;

    // Gateway admission bookkeeping (clients may submit from many threads).
    std::mutex admission_mutex;
    std::set<std::pair<Address, std::uint64_t>> admitted;
    std::uint64_t admitted_count = 0;

    std::mutex commit_mutex;
    std::vector<CommitRecord> commits;
    std::atomic<std::uint64_t> committed_total{0};
    std::atomic<std::uint64_t> aborted_total{0};
    std::atomic<std::uint64_t> skipped_total{0};
};

WallChain::WallChain(const ChainConfig& cfg) : impl_(std::make_unique<Impl>(cfg)) {
    validate(cfg);
}

WallChain::~WallChain() { stop(); }

Nanos WallChain::now_ns() { return impl_->now(); }

AdmissionReceipt WallChain::submit_txn(const SignedTransaction& txn) {
    if (!impl_->started) impl_->start();
    {
        std::lock_guard lk(impl_->admission_mutex);
        const auto key = std::make_pair(txn.sender, txn.sequence_number);
        if (impl_->admitted.contains(key))
            return AdmissionReceipt::rejected(RejectReason::Duplicate);
        const std::uint64_t in_flight =
            impl_->admitted_count - impl_->committed_total.load(std::memory_order_relaxed);
        if (in_flight >= static_cast<std::uint64_t>(impl_->cfg.mempool_capacity))
            return AdmissionReceipt::rejected(RejectReason::Backpressure);
        impl_->admitted.insert(key);
        impl_->admitted_count += 1;
    }
    // All validators receive the txn through their inbox; the gateway's copy
    // skips the network.
    impl_->deliver_now(Envelope{-1, 0, consensus::TxnGossipMsg{{txn}}});
    for (int v = 1; v < impl_->cfg.num_validators; ++v)
        impl_->send(Envelope{-1, v, consensus::TxnGossipMsg{{txn}}});
    return AdmissionReceipt::ok();
}

AccountState WallChain::query_account(const Address& address) {
    if (!impl_->started) return impl_->genesis.query_account(address);
    auto& slot = *impl_->slots[0];
    std::shared_ptr<const LedgerState> snapshot;
    {
        std::lock_guard lk(slot.snapshot_mutex);
        snapshot = slot.snapshot;
    }
    return snapshot->query_account(address);
}

void WallChain::create_account(const Address& address) {
    if (impl_->started) throw RunError("create_account after submissions started");
    impl_->genesis.create_account(address);
}

void WallChain::mint(const Address& address, std::uint64_t amount) {
    if (impl_->started) throw RunError("mint after submissions started");
    impl_->genesis.mint(address, amount);
}

NetworkInfo WallChain::network_info() {
    return NetworkInfo{impl_->cfg.num_validators, impl_->cfg.consensus, impl_->cfg.mode,
                       impl_->now()};
}

void WallChain::drain(Nanos grace) {
    if (!impl_->started) return;
    while (true) {
        const auto before = impl_->committed_total.load();
        std::this_thread::sleep_for(chrono::nanoseconds(grace));
        if (impl_->committed_total.load() == before) return;
    }
}

void WallChain::stop() {
    impl_->stop();
    if (commit_log_.empty() && !impl_->commits.empty()) commit_log_ = impl_->commits;
}

std::optional<RunCounters> WallChain::counters() {
    return RunCounters{committed_txns(), aborted_scripts(), skipped_txns()};
}

std::uint64_t WallChain::committed_txns() const { return impl_->committed_total.load(); }
std::uint64_t WallChain::aborted_scripts() const { return impl_->aborted_total.load(); }
std::uint64_t WallChain::skipped_txns() const { return impl_->skipped_total.load(); }

std::uint64_t WallChain::state_hash(int validator) {
    stop();
    return impl_->slots.at(static_cast<std::size_t>(validator))->node->ledger().state_hash();
}

nlohmann::json WallChain::dump_state(int validator) {
    stop();
    return impl_->slots.at(static_cast<std::size_t>(validator))->node->ledger().dump_json();
}

}  // namespace chainbench
