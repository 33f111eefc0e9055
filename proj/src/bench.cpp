// Copyright 2026 the chainbench authors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "chainbench/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include "chainbench/rng.hpp"

namespace chainbench::bench {

std::uint64_t default_warmup(std::uint64_t total_txns) {
    if (total_txns <= 1) return 0;
    return std::min(std::max<std::uint64_t>(total_txns / 10, 10), total_txns - 1);
}

std::vector<ClientSpec> make_client_specs(int count, std::uint64_t total_txns,
                                          ScriptKind script_kind, std::uint64_t transfer_amount,
                                          std::uint64_t vm_iterations) {
    if (count < 1) throw ConfigError("client count must be >= 1");
    if (total_txns < 1) throw ConfigError("total_txns must be >= 1");
    std::vector<ClientSpec> specs;
    const std::uint64_t base = total_txns / static_cast<std::uint64_t>(count);
    const std::uint64_t remainder = total_txns % static_cast<std::uint64_t>(count);
    for (int i = 0; i < count; ++i) {
        const std::uint64_t txns = base + (static_cast<std::uint64_t>(i) < remainder ? 1 : 0);
        if (txns == 0) continue;
        ClientSpec spec;
        spec.index = static_cast<int>(specs.size());
        spec.sender = Address{0x1000 + 2 * static_cast<std::uint64_t>(i)};
        spec.receiver = Address{0x1001 + 2 * static_cast<std::uint64_t>(i)};
        spec.total_txns = txns;
        spec.warmup_txns = default_warmup(txns);
        switch (script_kind) {
            case ScriptKind::Transfer:
                spec.script = Script::transfer(spec.receiver, transfer_amount);
                break;
            case ScriptKind::DoNothing:
                spec.script = Script::do_nothing();
                break;
            case ScriptKind::VmHeavy:
                spec.script = Script::vm_heavy(vm_iterations);
                break;
        }
        specs.push_back(spec);
    }
    return specs;
}

double compute_average_tps(const std::vector<ClientObservation>& observations) {
    if (observations.empty()) throw MeasurementError("no observations");
    double acc = 0.0;
    for (const auto& obs : observations) {
        if (obs.t_end <= obs.t_start) throw MeasurementError("empty measurement window");
        const double dt_s = static_cast<double>(obs.t_end - obs.t_start) / 1e9;
        acc += static_cast<double>(obs.seq_end - obs.seq_start) / dt_s;
    }
    return acc / static_cast<double>(observations.size());
}

double measure_execution_time_s(const std::vector<ClientObservation>& observations) {
    if (observations.empty()) throw MeasurementError("no observations");
    Nanos first = observations.front().t_start;
    Nanos last = observations.front().t_end;
    for (const auto& obs : observations) {
        first = std::min(first, obs.t_start);
        last = std::max(last, obs.t_end);
    }
    if (last <= first) throw MeasurementError("empty measurement window");
    return static_cast<double>(last - first) / 1e9;
}

namespace {

void validate_specs(const std::vector<ClientSpec>& clients) {
    if (clients.empty()) throw ConfigError("no clients configured");
    std::set<Address> senders;
    for (const auto& spec : clients) {
        if (spec.total_txns < 1) throw ConfigError("client total_txns must be >= 1");
        if (spec.warmup_txns >= spec.total_txns)
            throw ConfigError("warmup_txns must be smaller than total_txns");
        if (spec.sender == spec.receiver)
            throw ConfigError("client sender and receiver must differ");
        if (!senders.insert(spec.sender).second)
            throw ConfigError("client senders must be distinct");
        if (spec.script.kind() == ScriptKind::Transfer && spec.script.payee() != spec.receiver)
            throw ConfigError("transfer script payee must be the client receiver");
    }
}

// Phase 1: create the account pool and mint enough balance for the whole
// workload (balance >= txns * amount for transfer clients).
void setup_accounts(const std::vector<ClientSpec>& clients, TargetAdapter& target) {
    for (const auto& spec : clients) {
        target.create_account(spec.sender);
        target.create_account(spec.receiver);
        if (spec.script.kind() == ScriptKind::Transfer)
            target.mint(spec.sender, spec.total_txns * spec.script.amount());
    }
}

struct ClientRun {
    const ClientSpec* spec = nullptr;
    std::uint64_t next_seq = 0;
    std::uint64_t submit_target = 0;
    bool started = false;   // first observation recorded
    bool finished = false;  // second observation recorded
    bool timed_out = false;
    std::uint64_t submitted = 0;
    ClientObservation obs;
};

// Submits up to the client's current target; returns false when backpressure
// asks the caller to retry later.
bool submit_some(ClientRun& run, TargetAdapter& target) {
    while (run.next_seq < run.submit_target) {
        const auto txn =
            make_signed_txn(run.spec->sender, run.next_seq, run.spec->script, target.now_ns());
        const auto receipt = target.submit_txn(txn);
        if (receipt.admitted) {
            run.next_seq += 1;
            run.submitted += 1;
            continue;
        }
        if (receipt.reason == RejectReason::Backpressure) return false;
        throw RunError(std::string("submission rejected: ") + to_string(receipt.reason));
    }
    return true;
}

std::vector<ClientRun> make_runs(const std::vector<ClientSpec>& clients) {
    std::vector<ClientRun> runs;
    runs.reserve(clients.size());
    for (const auto& spec : clients) {
        ClientRun run;
        run.spec = &spec;
        run.submit_target = spec.warmup_txns;
        runs.push_back(run);
    }
    return runs;
}

// Advances one client's state machine off a fresh sequence-number query.
// Returns true if anything changed.
void advance_client(ClientRun& run, TargetAdapter& target, Nanos now) {
    if (run.finished) return;
    if (run.next_seq < run.submit_target) submit_some(run, target);

    const std::uint64_t seq = target.query_account(run.spec->sender).sequence_number;
    if (!run.started) {
        if (run.next_seq >= run.spec->warmup_txns && seq >= run.spec->warmup_txns) {
            run.obs.seq_start = seq;
            run.obs.t_start = now;
            run.started = true;
            run.submit_target = run.spec->total_txns;
            submit_some(run, target);
        }
        return;
    }
    if (seq >= run.spec->total_txns && run.next_seq >= run.spec->total_txns) {
        run.obs.seq_end = seq;
        run.obs.t_end = now;
        run.finished = true;
    }
}

void finish_timed_out(ClientRun& run, TargetAdapter& target, Nanos now) {
    if (run.finished) return;
    const std::uint64_t seq = target.query_account(run.spec->sender).sequence_number;
    if (!run.started) {
        run.obs.seq_start = seq;
        run.obs.t_start = now;
    }
    run.obs.seq_end = std::max(seq, run.obs.seq_start);
    run.obs.t_end = std::max(now, run.obs.t_start + 1);
    run.finished = true;
    run.timed_out = true;
}

// Virtual-time driver: clients are re-examined after every simulator event,
// i.e. the polling interval is one event step and observations land exactly
// on commit boundaries.
void drive_virtual(std::vector<ClientRun>& runs, SimChain& chain, const BenchOptions& opts) {
    const Nanos deadline = chain.now_ns() + opts.timeout;
    for (auto& run : runs) submit_some(run, chain);
    while (true) {
        bool all_done = true;
        for (auto& run : runs) {
            advance_client(run, chain, chain.now_ns());
            all_done = all_done && run.finished;
        }
        if (all_done) break;
        if (chain.now_ns() > deadline || !chain.step()) {
            for (auto& run : runs) finish_timed_out(run, chain, chain.now_ns());
            break;
        }
    }
    // Let stragglers replicate so post-run state dumps agree.
    chain.run_while([&] { return !chain.converged(); }, chain.now_ns() + 5 * kNanosPerSecond);
}

// Wall-clock driver: one worker thread per client, periodic polling against
// the monotonic clock right after each query response.
void drive_wall(std::vector<ClientRun>& runs, TargetAdapter& target, const BenchOptions& opts) {
    const Nanos deadline = target.now_ns() + opts.timeout;
    std::vector<std::thread> workers;
    workers.reserve(runs.size());
    for (auto& run : runs) {
        workers.emplace_back([&run, &target, &opts, deadline] {
            while (!run.finished) {
                if (target.now_ns() > deadline) {
                    finish_timed_out(run, target, target.now_ns());
                    break;
                }
                if (!submit_some(run, target)) {
                    std::this_thread::sleep_for(std::chrono::milliseconds(1));
                    continue;
                }
                advance_client(run, target, target.now_ns());
                if (!run.finished)
                    std::this_thread::sleep_for(
                        std::chrono::nanoseconds(opts.poll_interval_wall));
            }
        });
    }
    for (auto& worker : workers) worker.join();
    if (auto* wall = dynamic_cast<WallChain*>(&target)) wall->drain(200 * kNanosPerMilli);
}

}  // namespace

RunMetrics run_three_phase(const std::vector<ClientSpec>& clients, TargetAdapter& target,
                           const BenchOptions& opts) {
    validate_specs(clients);

    NetworkInfo info;
    try {
        info = target.network_info();
    } catch (const std::exception& e) {
        throw RunError(std::string("target unreachable: ") + e.what());
    }

    setup_accounts(clients, target);

    auto runs = make_runs(clients);
    if (auto* chain = dynamic_cast<SimChain*>(&target))
        drive_virtual(runs, *chain, opts);
    else
        drive_wall(runs, target, opts);

    RunMetrics metrics;
    metrics.observations.reserve(runs.size());
    for (const auto& run : runs) {
        metrics.observations.push_back(run.obs);
        metrics.submitted += run.submitted;
        metrics.partial = metrics.partial || run.timed_out;
        const double dt_s = static_cast<double>(run.obs.t_end - run.obs.t_start) / 1e9;
        metrics.per_client_tps.push_back(
            static_cast<double>(run.obs.seq_end - run.obs.seq_start) / dt_s);
    }
    metrics.average_tps = compute_average_tps(metrics.observations);
    metrics.execution_time_s = measure_execution_time_s(metrics.observations);
    if (const auto counters = target.counters()) {
        metrics.committed = counters->committed;
        metrics.aborted = counters->aborted + counters->skipped;
    } else {
        for (const auto& run : runs) metrics.committed += run.obs.seq_end;
    }
    (void)info;
    return metrics;
}

AggregateResult repeat_and_aggregate(const RunPlan& plan, int repetitions) {
    if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
    AggregateResult result;
    for (int rep = 0; rep < repetitions; ++rep) {
        ChainConfig cfg = plan.chain;
        cfg.net.seed = plan.vary_seed ? derive_seed(plan.base_seed, static_cast<std::uint64_t>(rep))
                                      : plan.base_seed;
        auto target = spawn_network(cfg);
        RunMetrics metrics;
        try {
            metrics = run_three_phase(plan.clients, *target, plan.opts);
        } catch (const std::exception& e) {
            result.ok = false;
            result.failure = "repetition " + std::to_string(rep) + " failed: " + e.what();
            break;
        }
        metrics.repetition = rep;
        metrics.seed = cfg.net.seed;
        if (!plan.opts.run_json_dir.empty())
            emit_run_json(metrics, to_json(cfg), plan.opts.run_json_dir);
        const bool failed = metrics.partial;
        result.runs.push_back(std::move(metrics));
        if (failed) {
            result.ok = false;
            result.failure = "repetition " + std::to_string(rep) + " timed out (partial run)";
            break;
        }
    }

    if (!result.runs.empty()) {
        double tps_sum = 0.0, time_sum = 0.0;
        for (const auto& run : result.runs) {
            tps_sum += run.average_tps;
            time_sum += run.execution_time_s;
        }
        const double n = static_cast<double>(result.runs.size());
        const double mean = tps_sum / n;
        double var = 0.0;
        for (const auto& run : result.runs)
            var += (run.average_tps - mean) * (run.average_tps - mean);
        result.aggregate.mean_tps = mean;
        result.aggregate.std_tps = std::sqrt(var / n);
        result.aggregate.mean_execution_time_s = time_sum / n;
        result.aggregate.repetitions = static_cast<int>(result.runs.size());
    }
    return result;
}

nlohmann::json to_json(const ClientObservation& obs) {
    return {{"seq_start", obs.seq_start},
            {"seq_end", obs.seq_end},
            {"t_start_ns", obs.t_start},
            {"t_end_ns", obs.t_end}};
}

nlohmann::json to_json(const RunMetrics& metrics) {
    nlohmann::json obs = nlohmann::json::array();
    for (const auto& o : metrics.observations) obs.push_back(to_json(o));
    return {{"average_tps", metrics.average_tps},
            {"per_client_tps", metrics.per_client_tps},
            {"execution_time_s", metrics.execution_time_s},
            {"submitted", metrics.submitted},
            {"committed", metrics.committed},
            {"aborted", metrics.aborted},
            {"repetition", metrics.repetition},
            {"seed", metrics.seed},
            {"partial", metrics.partial},
            {"observations", obs}};
}

void emit_run_json(const RunMetrics& metrics, const nlohmann::json& config_echo,
                   const std::string& dir) {
    std::filesystem::create_directories(dir);
    const auto stamp = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::system_clock::now().time_since_epoch())
                           .count();
    const auto path = std::filesystem::path(dir) /
                      ("run-" + std::to_string(stamp) + "-" + std::to_string(metrics.seed) +
                       ".json");
    nlohmann::json doc = {{"config", config_echo}, {"metrics", to_json(metrics)}};
    std::ofstream out(path);
    if (!out) throw RunError("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

}  // namespace chainbench::bench
