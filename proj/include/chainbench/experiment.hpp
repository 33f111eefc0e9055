// Copyright 2026 the chainbench authors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chainbench/bench.hpp"

namespace chainbench::experiment {

enum class PlanKind : std::uint8_t { WorkloadSweep, PeerSweep, VmSweep, Ablation };

const char* to_string(PlanKind kind);
std::optional<PlanKind> plan_kind_from_string(const std::string& name);

// Published throughput of the four layer combinations, attached to ablation
// reports as the reference column (same row order).
inline constexpr double kAblationReferenceTps[4] = {643.82, 1030.7, 744.22, 1348.68};

struct ExperimentPlan {
    PlanKind kind = PlanKind::WorkloadSweep;
    std::vector<std::uint64_t> values;  // txn counts / peer counts / iteration counts
    ChainConfig base_chain;
    int client_count = 12;
    std::uint64_t fixed_txns = 2000;  // peer/vm/ablation workload (quick default)
    std::uint64_t transfer_amount = 1;
    int repetitions = bench::kDefaultRepetitions;
    std::uint64_t seed = 1;
    bench::BenchOptions opts;
};

// Default sweep values: the workload subset, the published peer counts and
// the iteration ladder.
std::vector<std::uint64_t> default_values(PlanKind kind);

struct AblationRow {
    bool execution_on = false;
    bool consensus_on = false;
    ScriptKind script = ScriptKind::DoNothing;  // on -> Transfer, off -> DoNothing
    int peers = 1;                              // on -> 4, off -> 1
};

// Exactly the four combinations, in the published table order:
// (on,on), (on,off), (off,on), (off,off).
std::vector<AblationRow> ablation_rows();

struct ReportRow {
    PlanKind kind = PlanKind::WorkloadSweep;
    std::uint64_t variable = 0;
    std::string label;
    double mean_tps = 0.0;
    double std_tps = 0.0;
    double mean_execution_time_s = 0.0;
    std::uint64_t committed = 0;
    std::uint64_t aborted = 0;
    std::vector<std::uint64_t> seeds;
    double paper_reference_tps = 0.0;  // ablation rows only
    bool failed = false;
    std::string error;

    bool operator==(const ReportRow&) const = default;
};

struct Verdicts {
    std::optional<bool> rise_then_fall;            // workload sweep
    std::optional<bool> non_increasing;            // peer sweep
    std::optional<double> peer_ratio_pct;          // Tps(last)/Tps(first) * 100
    std::optional<bool> strictly_decreasing;       // vm sweep
    std::optional<bool> slow_decrease;             // Tps(n_max) > Tps(n_min)/100
    std::optional<bool> offoff_gt_onoff;           // ablation orderings
    std::optional<bool> offoff_gt_offon;
    std::optional<bool> onon_is_min;
    std::optional<bool> consensus_bottleneck;      // consensus impact > execution impact

    // True when every verdict recorded for this plan kind holds.
    bool all_hold() const;
};

struct Report {
    PlanKind kind = PlanKind::WorkloadSweep;
    std::vector<ReportRow> rows;
    Verdicts verdicts;
    nlohmann::json metadata;
};

// Adjacent-point comparisons with a relative noise tolerance (0 = exact).
bool is_non_increasing(const std::vector<double>& xs, double tol);
bool is_strictly_decreasing(const std::vector<double>& xs, double tol);
bool is_rise_then_fall(const std::vector<double>& xs, double tol);

Report run_workload_sweep(const ExperimentPlan& plan);
Report run_peer_sweep(const ExperimentPlan& plan);
Report run_vm_sweep(const ExperimentPlan& plan);
Report run_ablation(const ExperimentPlan& plan);
Report run_plan(const ExperimentPlan& plan);

// CSV with the fixed header
// plan,variable,mean_tps,std_tps,mean_exec_time_s,committed,aborted,seed_set
// and one line per row, deterministic byte for byte for equal inputs.
std::string report_csv(const Report& report);
nlohmann::json report_json(const Report& report);
Report report_from_json(const nlohmann::json& doc);

// Writes report.csv and report.json under dir.
void emit_report(const Report& report, const std::string& dir);

}  // namespace chainbench::experiment
