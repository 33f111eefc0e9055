// Copyright 2026 the chainbench authors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "chainbench/experiment.hpp"

namespace chainbench::config {

// Minimal TOML reader covering what the config format uses: [table] and
// [dotted.table] headers, bare keys, strings, integers, floats, booleans,
// flat arrays, and # comments. Keys are flattened to dotted paths.
class Toml {
public:
    using Scalar = std::variant<std::string, std::int64_t, double, bool>;

    static Toml parse_string(const std::string& text);
    static Toml parse_file(const std::string& path);

    bool has(const std::string& key) const;

    std::optional<std::string> get_string(const std::string& key) const;
    std::optional<std::int64_t> get_int(const std::string& key) const;
    std::optional<double> get_double(const std::string& key) const;  // ints promote
    std::optional<bool> get_bool(const std::string& key) const;
    std::optional<std::vector<std::uint64_t>> get_u64_array(const std::string& key) const;

    // Strictness: every key must be consumed by a getter; leftovers are
    // reported as unknown keys.
    void expect_fully_consumed() const;

private:
    struct Entry {
        Scalar scalar;
        std::vector<Scalar> array;
        bool is_array = false;
        mutable bool consumed = false;
    };
    const Entry* find(const std::string& key) const;

    std::map<std::string, Entry> entries_;
};

// Everything the CLI needs: the chain, the client template, the experiment
// shape and report options. CLI flags override file values.
struct LoadedConfig {
    ChainConfig chain;

    // [clients]
    int count = 12;
    std::uint64_t total_txns = 1000;  // per client, mirrors the client spec
    std::optional<std::uint64_t> warmup_txns;
    ScriptKind script = ScriptKind::Transfer;
    std::uint64_t iterations = 1000;
    std::uint64_t amount = 1;
    std::optional<std::uint64_t> mint_amount;

    // [experiment]
    std::optional<experiment::PlanKind> kind;
    std::vector<std::uint64_t> values;  // empty -> per-kind defaults
    std::uint64_t fixed_txns = 0;       // 0 -> 2000 quick / 10000 full
    bool quick = true;
    int repetitions = bench::kDefaultRepetitions;
    std::uint64_t seed = 1;

    // [report]
    std::string out_dir = "reports";
    bool assert_trends = false;
    bool emit_run_json = false;

    std::uint64_t effective_fixed_txns() const {
        if (fixed_txns > 0) return fixed_txns;
        return quick ? 2000 : 10000;
    }

    // Client specs for a single `run` (count x total_txns each).
    std::vector<bench::ClientSpec> make_run_clients() const;

    // Experiment plan for a sweep/ablation of the given kind.
    experiment::ExperimentPlan make_plan(experiment::PlanKind plan_kind) const;
};

LoadedConfig load_config(const Toml& toml);
LoadedConfig load_config_file(const std::string& path);

}  // namespace chainbench::config
