#pragma once

#include <vector>

#include "derecho/config.hpp"
#include "derecho/events.hpp"

namespace derecho {

struct BenchResult {
    bool completed = false;      // every client request answered
    double wall_seconds = 0;
    long long executes = 0;      // total execute events across nodes
    std::vector<ProtocolEvent> merged_trace;  // per-node order only; not checked
};

// Real-concurrency mode: one thread per node and per client, mailbox message
// passing, no failure injection. Wall-clock benchmarking only; correctness
// checking belongs to the deterministic simulator.
BenchResult run_threaded(const SimConfig& cfg);

}  // namespace derecho
