// Copyright 2026 the chainbench authors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "chainbench/chain.hpp"

namespace chainbench::bench {

struct ClientSpec {
    int index = 0;
    Address sender{};
    Address receiver{};
    std::uint64_t total_txns = 0;
    std::uint64_t warmup_txns = 0;
    Script script = Script::do_nothing();
};

// 10% of the total, at least 10, always leaving room for one measured txn.
std::uint64_t default_warmup(std::uint64_t total_txns);

// Evenly splits a total workload across `count` clients (remainder to the
// first ones); clients that would get zero transactions are dropped. The
// transfer template is instantiated per client against its own receiver.
std::vector<ClientSpec> make_client_specs(int count, std::uint64_t total_txns,
                                          ScriptKind script_kind, std::uint64_t transfer_amount,
                                          std::uint64_t vm_iterations);

struct ClientObservation {
    std::uint64_t seq_start = 0;  // seq_i^s
    std::uint64_t seq_end = 0;    // seq_i^e
    Nanos t_start = 0;            // t_i^s
    Nanos t_end = 0;              // t_i^e
};

struct RunMetrics {
    double average_tps = 0.0;
    std::vector<double> per_client_tps;
    double execution_time_s = 0.0;
    std::uint64_t submitted = 0;
    std::uint64_t committed = 0;
    std::uint64_t aborted = 0;
    int repetition = 0;
    std::uint64_t seed = 0;
    bool partial = false;  // a timeout left unfinished clients; never averaged silently
    std::vector<ClientObservation> observations;
};

struct AggregateMetrics {
    double mean_tps = 0.0;
    double std_tps = 0.0;  // population standard deviation over repetitions
    double mean_execution_time_s = 0.0;
    int repetitions = 0;
};

class MeasurementError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Average Tps = (1/n) * sum_i (seq_i^e - seq_i^s) / (t_i^e - t_i^s).
double compute_average_tps(const std::vector<ClientObservation>& observations);

// Whole-batch wall span: max_i t_i^e - min_i t_i^s, in seconds.
double measure_execution_time_s(const std::vector<ClientObservation>& observations);

struct BenchOptions {
    Nanos poll_interval_wall = 100 * kNanosPerMilli;  // virtual mode polls per event step
    Nanos timeout = 120 * kNanosPerSecond;
    std::string run_json_dir;  // when set, emits run-<timestamp>-<seed>.json
};

// The three-phase workflow: create and fund the accounts, run all clients
// concurrently (warm up, observe, submit, poll to completion), return
// Eq.-1 metrics. Throws ConfigError before any submission on bad specs and
// RunError if the target is unreachable.
RunMetrics run_three_phase(const std::vector<ClientSpec>& clients, TargetAdapter& target,
                           const BenchOptions& opts = {});

struct RunPlan {
    ChainConfig chain;
    std::vector<ClientSpec> clients;
    BenchOptions opts;
    std::uint64_t base_seed = 1;
    bool vary_seed = true;  // distinct seed per repetition
};

inline constexpr int kDefaultRepetitions = 5;

struct AggregateResult {
    AggregateMetrics aggregate;
    std::vector<RunMetrics> runs;
    bool ok = true;
    std::string failure;  // set when a repetition failed; aggregate covers completed runs
};

// Runs the plan `repetitions` times on fresh targets and reports mean and
// population std of the per-run average Tps. A failed repetition aborts
// aggregation; completed runs stay in the partial report.
AggregateResult repeat_and_aggregate(const RunPlan& plan, int repetitions = kDefaultRepetitions);

nlohmann::json to_json(const ClientObservation& obs);
nlohmann::json to_json(const RunMetrics& metrics);
void emit_run_json(const RunMetrics& metrics, const nlohmann::json& config_echo,
                   const std::string& dir);

}  // namespace chainbench::bench
