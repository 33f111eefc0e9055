// Copyright 2026 the chainbench authors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <optional>

#include "chainbench/common.hpp"
#include "chainbench/rng.hpp"

namespace chainbench {

// Message-level network behaviour: fixed base one-way latency, uniform jitter
// half-width, independent drop probability, all driven by one seed.
struct NetConfig {
    Nanos base_latency = 1 * kNanosPerMilli;
    Nanos jitter = 0;
    double drop_rate = 0.0;
    std::uint64_t seed = 1;
};

// Validates invariants (positive latency, jitter < latency, drop_rate < 1);
// throws ConfigError.
void validate(const NetConfig& cfg);

// Decides drop/delivery per message. Deterministic given the seed and the
// send order; the delivery time depends only on the draws made so far.
class NetworkModel {
public:
    explicit NetworkModel(const NetConfig& cfg) : cfg_(cfg), rng_(cfg.seed) { validate(cfg); }

    struct Decision {
        bool dropped = false;
        Nanos deliver_at = 0;  // meaningful iff !dropped
    };

    Decision schedule(Nanos send_time) {
        if (cfg_.drop_rate > 0.0 && rng_.next_unit() < cfg_.drop_rate) return {true, 0};
        Nanos latency = cfg_.base_latency;
        if (cfg_.jitter > 0) latency += rng_.next_in_range(-cfg_.jitter, cfg_.jitter);
        return {false, send_time + latency};
    }

    const NetConfig& config() const { return cfg_; }

private:
    NetConfig cfg_;
    DetRng rng_;
};

}  // namespace chainbench
