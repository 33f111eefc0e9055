// Copyright 2026 the chainbench authors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "chainbench/simnet.hpp"

namespace chainbench {

void validate(const NetConfig& cfg) {
    if (cfg.base_latency <= 0) throw ConfigError("net.base_latency must be positive");
    if (cfg.jitter < 0 || cfg.jitter >= cfg.base_latency)
        throw ConfigError("net.jitter must be in [0, base_latency)");
    if (!(cfg.drop_rate >= 0.0) || cfg.drop_rate >= 1.0)
        throw ConfigError("net.drop_rate must be in [0, 1)");
}

}  // namespace chainbench
