// Copyright 2026 the chainbench authors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "chainbench/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "chainbench/rng.hpp"

namespace chainbench::experiment {

const char* to_string(PlanKind kind) {
    switch (kind) {
        case PlanKind::WorkloadSweep: return "workload";
        case PlanKind::PeerSweep: return "peers";
        case PlanKind::VmSweep: return "vm";
        case PlanKind::Ablation: return "ablation";
    }
    return "unknown";
}

std::optional<PlanKind> plan_kind_from_string(const std::string& name) {
    if (name == "workload") return PlanKind::WorkloadSweep;
    if (name == "peers") return PlanKind::PeerSweep;
    if (name == "vm") return PlanKind::VmSweep;
    if (name == "ablation") return PlanKind::Ablation;
    return std::nullopt;
}

std::vector<std::uint64_t> default_values(PlanKind kind) {
    switch (kind) {
        case PlanKind::WorkloadSweep: return {1000, 3000, 5000, 7000, 10000};
        case PlanKind::PeerSweep: return {1, 4, 7, 10, 13, 16};
        case PlanKind::VmSweep: return {1, 10, 100, 1000};
        case PlanKind::Ablation: return {0, 1, 2, 3};
    }
    return {};
}

std::vector<AblationRow> ablation_rows() {
    return {{true, true, ScriptKind::Transfer, 4},
            {true, false, ScriptKind::Transfer, 1},
            {false, true, ScriptKind::DoNothing, 4},
            {false, false, ScriptKind::DoNothing, 1}};
}

bool Verdicts::all_hold() const {
    for (const auto& v : {rise_then_fall, non_increasing, strictly_decreasing, slow_decrease,
                          offoff_gt_onoff, offoff_gt_offon, onon_is_min, consensus_bottleneck}) {
        if (v.has_value() && !*v) return false;
    }
    return true;
}

bool is_non_increasing(const std::vector<double>& xs, double tol) {
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (xs[i] > xs[i - 1] * (1.0 + tol)) return false;
    return true;
}

bool is_strictly_decreasing(const std::vector<double>& xs, double tol) {
    for (std::size_t i = 1; i < xs.size(); ++i) {
        const bool ok = tol == 0.0 ? xs[i] < xs[i - 1] : xs[i] < xs[i - 1] * (1.0 + tol);
        if (!ok) return false;
    }
    return true;
}

bool is_rise_then_fall(const std::vector<double>& xs, double tol) {
    if (xs.size() < 3) return false;
    const std::size_t peak = static_cast<std::size_t>(
        std::max_element(xs.begin(), xs.end()) - xs.begin());
    if (peak == 0 || peak + 1 == xs.size()) return false;
    for (std::size_t i = 1; i <= peak; ++i)
        if (xs[i] < xs[i - 1] * (1.0 - tol)) return false;
    for (std::size_t i = peak + 1; i < xs.size(); ++i)
        if (xs[i] > xs[i - 1] * (1.0 + tol)) return false;
    return true;
}

namespace {

void validate_plan(const ExperimentPlan& plan) {
    if (plan.values.empty()) throw ConfigError("experiment values must be non-empty");
    if (plan.repetitions < 1) throw ConfigError("repetitions must be >= 1");
    if (plan.client_count < 1) throw ConfigError("client_count must be >= 1");
    validate(plan.base_chain);
}

// One aggregated row: `repetitions` independent runs on fresh targets.
ReportRow run_row(const ExperimentPlan& plan, PlanKind kind, std::uint64_t variable,
                  std::size_t row_index, const ChainConfig& chain,
                  const std::vector<bench::ClientSpec>& clients, const std::string& label) {
    ReportRow row;
    row.kind = kind;
    row.variable = variable;
    row.label = label;
    try {
        bench::RunPlan run_plan;
        run_plan.chain = chain;
        run_plan.clients = clients;
        run_plan.opts = plan.opts;
        run_plan.base_seed = derive_seed(plan.seed, row_index);
        const auto result = bench::repeat_and_aggregate(run_plan, plan.repetitions);
        if (!result.ok) throw RunError(result.failure);
        row.mean_tps = result.aggregate.mean_tps;
        row.std_tps = result.aggregate.std_tps;
        row.mean_execution_time_s = result.aggregate.mean_execution_time_s;
        for (const auto& run : result.runs) {
            row.committed += run.committed;
            row.aborted += run.aborted;
            row.seeds.push_back(run.seed);
        }
    } catch (const std::exception& e) {
        row.failed = true;
        row.error = e.what();
    }
    return row;
}

double tolerance_for(const ExperimentPlan& plan) {
    // Virtual-time rows are deterministic: exact comparisons. Wall-clock rows
    // get a 5% adjacent-point noise allowance.
    return plan.base_chain.mode == TimeMode::VirtualTime ? 0.0 : 0.05;
}

std::vector<double> tps_of(const std::vector<ReportRow>& rows) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(row.mean_tps);
    return out;
}

bool all_ok(const std::vector<ReportRow>& rows) {
    return std::none_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.failed; });
}

nlohmann::json plan_metadata(const ExperimentPlan& plan) {
    return {{"client_count", plan.client_count},
            {"fixed_txns", plan.fixed_txns},
            {"transfer_amount", plan.transfer_amount},
            {"repetitions", plan.repetitions},
            {"seed", plan.seed},
            {"warmup_policy", "10% of client total, minimum 10"},
            {"std_convention", "population"},
            {"gateway", "all submissions enter validator 0"},
            {"mode", to_string(plan.base_chain.mode)},
            {"tolerance", tolerance_for(plan)},
            {"config_hash", config_hash(plan.base_chain)},
            {"chain", to_json(plan.base_chain)}};
}

}  // namespace

Report run_workload_sweep(const ExperimentPlan& plan) {
    validate_plan(plan);
    Report report;
    report.kind = PlanKind::WorkloadSweep;
    report.metadata = plan_metadata(plan);
    for (std::size_t i = 0; i < plan.values.size(); ++i) {
        const std::uint64_t txns = plan.values[i];
        const auto clients = bench::make_client_specs(plan.client_count, txns,
                                                      ScriptKind::Transfer,
                                                      plan.transfer_amount, 0);
        report.rows.push_back(run_row(plan, PlanKind::WorkloadSweep, txns, i, plan.base_chain,
                                      clients, std::to_string(txns) + " txns"));
    }
    if (all_ok(report.rows) && report.rows.size() >= 3)
        report.verdicts.rise_then_fall =
            is_rise_then_fall(tps_of(report.rows), tolerance_for(plan));
    return report;
}

Report run_peer_sweep(const ExperimentPlan& plan) {
    validate_plan(plan);
    Report report;
    report.kind = PlanKind::PeerSweep;
    report.metadata = plan_metadata(plan);
    const auto clients = bench::make_client_specs(plan.client_count, plan.fixed_txns,
                                                  ScriptKind::Transfer, plan.transfer_amount, 0);
    for (std::size_t i = 0; i < plan.values.size(); ++i) {
        const int peers = static_cast<int>(plan.values[i]);
        ChainConfig chain = plan.base_chain;
        chain.num_validators = peers;
        report.rows.push_back(run_row(plan, PlanKind::PeerSweep, plan.values[i], i, chain,
                                      clients, std::to_string(peers) + " peers"));
    }
    if (all_ok(report.rows)) {
        report.verdicts.non_increasing =
            is_non_increasing(tps_of(report.rows), tolerance_for(plan));
        if (report.rows.size() >= 2 && report.rows.front().mean_tps > 0.0)
            report.verdicts.peer_ratio_pct =
                100.0 * report.rows.back().mean_tps / report.rows.front().mean_tps;
    }
    return report;
}

Report run_vm_sweep(const ExperimentPlan& plan) {
    validate_plan(plan);
    Report report;
    report.kind = PlanKind::VmSweep;
    report.metadata = plan_metadata(plan);
    for (std::size_t i = 0; i < plan.values.size(); ++i) {
        const std::uint64_t iterations = plan.values[i];
        const auto clients = bench::make_client_specs(plan.client_count, plan.fixed_txns,
                                                      ScriptKind::VmHeavy, plan.transfer_amount,
                                                      iterations);
        report.rows.push_back(run_row(plan, PlanKind::VmSweep, iterations, i, plan.base_chain,
                                      clients, std::to_string(iterations) + " iterations"));
    }
    if (all_ok(report.rows)) {
        const auto tps = tps_of(report.rows);
        if (tps.size() >= 2) {
            report.verdicts.strictly_decreasing =
                is_strictly_decreasing(tps, tolerance_for(plan));
            report.verdicts.slow_decrease = tps.back() > tps.front() / 100.0;
        }
    }
    return report;
}

Report run_ablation(const ExperimentPlan& plan) {
    validate_plan(plan);
    Report report;
    report.kind = PlanKind::Ablation;
    report.metadata = plan_metadata(plan);

    const auto rows = ablation_rows();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const AblationRow& ab = rows[i];
        ChainConfig chain = plan.base_chain;
        chain.num_validators = ab.peers;
        const auto clients = bench::make_client_specs(plan.client_count, plan.fixed_txns,
                                                      ab.script, plan.transfer_amount, 0);
        const std::string label = std::string("exec=") + (ab.execution_on ? "on" : "off") +
                                  " cons=" + (ab.consensus_on ? "on" : "off");
        auto row = run_row(plan, PlanKind::Ablation, i, i, chain, clients, label);
        row.paper_reference_tps = kAblationReferenceTps[i];
        report.rows.push_back(std::move(row));
    }

    if (all_ok(report.rows) && report.rows.size() == 4) {
        const double on_on = report.rows[0].mean_tps;
        const double on_off = report.rows[1].mean_tps;
        const double off_on = report.rows[2].mean_tps;
        const double off_off = report.rows[3].mean_tps;
        report.verdicts.offoff_gt_onoff = off_off > on_off;
        report.verdicts.offoff_gt_offon = off_off > off_on;
        report.verdicts.onon_is_min =
            on_on <= on_off && on_on <= off_on && on_on <= off_off;
        const double consensus_impact = off_off - off_on;
        const double execution_impact = off_off - on_off;
        report.verdicts.consensus_bottleneck = consensus_impact > execution_impact;
    }
    return report;
}

Report run_plan(const ExperimentPlan& plan) {
    switch (plan.kind) {
        case PlanKind::WorkloadSweep: return run_workload_sweep(plan);
        case PlanKind::PeerSweep: return run_peer_sweep(plan);
        case PlanKind::VmSweep: return run_vm_sweep(plan);
        case PlanKind::Ablation: return run_ablation(plan);
    }
    throw ConfigError("unknown experiment kind");
}

namespace {

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    return buf;
}

std::string join_seeds(const std::vector<std::uint64_t>& seeds) {
    std::string out;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (i) out += ';';
        out += std::to_string(seeds[i]);
    }
    return out;
}

}  // namespace

std::string report_csv(const Report& report) {
    std::string out = "plan,variable,mean_tps,std_tps,mean_exec_time_s,committed,aborted,seed_set\n";
    for (const auto& row : report.rows) {
        out += to_string(row.kind);
        out += ',';
        out += std::to_string(row.variable);
        out += ',';
        out += format_double(row.mean_tps);
        out += ',';
        out += format_double(row.std_tps);
        out += ',';
        out += format_double(row.mean_execution_time_s);
        out += ',';
        out += std::to_string(row.committed);
        out += ',';
        out += std::to_string(row.aborted);
        out += ',';
        out += join_seeds(row.seeds);
        out += '\n';
    }
    return out;
}

namespace {

nlohmann::json row_json(const ReportRow& row) {
    nlohmann::json j = {{"plan", to_string(row.kind)},
                        {"variable", row.variable},
                        {"label", row.label},
                        {"mean_tps", row.mean_tps},
                        {"std_tps", row.std_tps},
                        {"mean_exec_time_s", row.mean_execution_time_s},
                        {"committed", row.committed},
                        {"aborted", row.aborted},
                        {"seed_set", row.seeds},
                        {"failed", row.failed}};
    if (row.paper_reference_tps > 0.0) j["paper_reference_tps"] = row.paper_reference_tps;
    if (row.failed) j["error"] = row.error;
    return j;
}

ReportRow row_from_json(const nlohmann::json& j) {
    ReportRow row;
    row.kind = plan_kind_from_string(j.at("plan").get<std::string>()).value();
    row.variable = j.at("variable").get<std::uint64_t>();
    row.label = j.at("label").get<std::string>();
    row.mean_tps = j.at("mean_tps").get<double>();
    row.std_tps = j.at("std_tps").get<double>();
    row.mean_execution_time_s = j.at("mean_exec_time_s").get<double>();
    row.committed = j.at("committed").get<std::uint64_t>();
    row.aborted = j.at("aborted").get<std::uint64_t>();
    row.seeds = j.at("seed_set").get<std::vector<std::uint64_t>>();
    row.failed = j.at("failed").get<bool>();
    if (j.contains("paper_reference_tps"))
        row.paper_reference_tps = j["paper_reference_tps"].get<double>();
    if (j.contains("error")) row.error = j["error"].get<std::string>();
    return row;
}

nlohmann::json verdicts_json(const Verdicts& v) {
    nlohmann::json j = nlohmann::json::object();
    auto put = [&j](const char* key, const std::optional<bool>& value) {
        if (value) j[key] = *value;
    };
    put("rise_then_fall", v.rise_then_fall);
    put("non_increasing", v.non_increasing);
    put("strictly_decreasing", v.strictly_decreasing);
    put("slow_decrease", v.slow_decrease);
    put("offoff_gt_onoff", v.offoff_gt_onoff);
    put("offoff_gt_offon", v.offoff_gt_offon);
    put("onon_is_min", v.onon_is_min);
    put("consensus_bottleneck", v.consensus_bottleneck);
    if (v.peer_ratio_pct) j["peer_ratio_pct"] = *v.peer_ratio_pct;
    return j;
}

Verdicts verdicts_from_json(const nlohmann::json& j) {
    Verdicts v;
    auto get = [&j](const char* key) -> std::optional<bool> {
        if (j.contains(key)) return j[key].get<bool>();
        return std::nullopt;
    };
    v.rise_then_fall = get("rise_then_fall");
    v.non_increasing = get("non_increasing");
    v.strictly_decreasing = get("strictly_decreasing");
    v.slow_decrease = get("slow_decrease");
    v.offoff_gt_onoff = get("offoff_gt_onoff");
    v.offoff_gt_offon = get("offoff_gt_offon");
    v.onon_is_min = get("onon_is_min");
    v.consensus_bottleneck = get("consensus_bottleneck");
    if (j.contains("peer_ratio_pct")) v.peer_ratio_pct = j["peer_ratio_pct"].get<double>();
    return v;
}

}  // namespace

nlohmann::json report_json(const Report& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : report.rows) rows.push_back(row_json(row));
    return {{"plan", to_string(report.kind)},
            {"rows", rows},
            {"verdicts", verdicts_json(report.verdicts)},
            {"metadata", report.metadata}};
}

Report report_from_json(const nlohmann::json& doc) {
    Report report;
    const auto kind = plan_kind_from_string(doc.at("plan").get<std::string>());
    if (!kind) throw ConfigError("unknown plan kind in report");
    report.kind = *kind;
    for (const auto& row : doc.at("rows")) report.rows.push_back(row_from_json(row));
    report.verdicts = verdicts_from_json(doc.at("verdicts"));
    if (doc.contains("metadata")) report.metadata = doc["metadata"];
    return report;
}

void emit_report(const Report& report, const std::string& dir) {
    if (report.rows.empty()) throw ConfigError("refusing to emit an empty report");
    std::filesystem::create_directories(dir);
    {
        std::ofstream csv(std::filesystem::path(dir) / "report.csv", std::ios::binary);
        if (!csv) throw RunError("cannot write report.csv under " + dir);
        csv << report_csv(report);
    }
    {
        std::ofstream json(std::filesystem::path(dir) / "report.json", std::ios::binary);
        if (!json) throw RunError("cannot write report.json under " + dir);
        json << report_json(report).dump(2) << '\n';
    }
}

}  // namespace chainbench::experiment
