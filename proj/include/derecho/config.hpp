#pragma once

#include <cstdint>
#include <stdexcept>

namespace derecho {

// get_buffer guard variants. Exact refuses a slot when
// sent_num - completed_num == window_size and flags > as a protocol bug.
// Overwrite reproduces the known-bad guard that refuses only on >, allowing
// a full ring buffer to be overwritten; kept for regression tests.
enum class BufferGuard { Exact, Overwrite };

// Leader-selection variants. Fixed recomputes agreement from scratch each
// evaluation round and updates the local leader on non-leader nodes. Buggy
// reproduces the deadlock-prone original: the agreement flag is initialized
// once and never reset, and non-leaders never update their local leader.
enum class LeaderMode { Fixed, Buggy };

struct SimConfig {
    int num_nodes = 3;
    int num_clients = 1;
    int requests_per_client = 10;
    int window_size = 10;

    bool test_failure = false;
    int fail_node = 0;
    long long fail_after = 300;        // scheduler step of the injected crash
    long long detection_delay = 50;    // steps until survivors are notified
    long long detection_stagger = 0;   // extra per-survivor notification delay
    long long detect_timeout = 0;      // 0 disables the timeout-based detector

    long long resend_timeout = 400;    // client resend period, in steps

    uint64_t seed = 1;
    long long max_steps = 10'000'000;

    BufferGuard buffer_guard = BufferGuard::Exact;
    LeaderMode leader_mode = LeaderMode::Fixed;

    void validate() const {
        if (num_nodes < 1) throw std::invalid_argument("num_nodes must be >= 1");
        if (num_clients < 0) throw std::invalid_argument("num_clients must be >= 0");
        if (requests_per_client < 0)
            throw std::invalid_argument("requests_per_client must be >= 0");
        if (window_size < 1) throw std::invalid_argument("window_size must be >= 1");
        if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
        if (test_failure && (fail_node < 0 || fail_node >= num_nodes))
            throw std::invalid_argument("fail_node must name a member node");
    }
};

}  // namespace derecho
