#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <random>
#include <sstream>
#include <string>

#include "derecho/sim.hpp"
#include "derecho/trace.hpp"
#include "mutate.hpp"
#include "oracle.hpp"

using namespace derecho;
using namespace derecho::testing;

namespace {

void report(int criterion, bool ok, const std::string& what) {
    std::printf("criterion %d: %s - %s\n", criterion, ok ? "PASS" : "FAIL", what.c_str());
    std::fflush(stdout);
    CHECK_MESSAGE(ok, "criterion ", criterion, ": ", what);
}

std::string trace_bytes(const RunResult& r) {
    std::ostringstream os;
    write_trace(os, r.trace);
    return os.str();
}

bool all_pass(const RunResult& r, std::string* why = nullptr) {
    if (r.status != SimStatus::Quiescent) {
        if (why) *why = std::string("run ended ") + status_name(r.status);
        return false;
    }
    if (!r.violations.empty()) {
        if (why) *why = "violation: " + r.violations.front();
        return false;
    }
    for (const auto& v : r.verdicts)
        if (!v.passed()) {
            if (why) *why = v.property + " failed: " + v.detail;
            return false;
        }
    return true;
}

}  // namespace

TEST_CASE("criterion 1: small failure-free run is fully checked and fast") {
    SimConfig cfg;  // 3 nodes, 1 client, 10 requests, window 10
    cfg.seed = 1;
    RunResult r = run_and_check(cfg);

    std::string why;
    bool ok = all_pass(r, &why);
    if (ok)
        for (int i = 0; i < cfg.num_nodes; ++i)
            if (r.executes_per_node.count(i) == 0 || r.executes_per_node.at(i) != 10) {
                ok = false;
                why = "node " + std::to_string(i) + " did not execute all 10 requests";
            }
    if (ok && !delivered_matches_roundrobin(r, &why)) ok = false;
    if (ok && r.wall_seconds >= 1.0) {
        ok = false;
        why = "took " + std::to_string(r.wall_seconds) + "s, limit 1s";
    }
    report(1, ok,
           "3 nodes, 10 requests: six checks pass, 10 executes per node, round-robin "
           "order, " + std::to_string(r.wall_seconds) + "s" + (ok ? "" : " (" + why + ")"));
}

TEST_CASE("criterion 2: 1000-request run stays correct within the time budget") {
    SimConfig cfg;
    cfg.requests_per_client = 1000;
    cfg.window_size = 400;
    cfg.seed = 2;
    RunResult r = run_and_check(cfg);

    std::string why;
    bool ok = all_pass(r, &why);
    if (ok)
        for (int i = 0; i < cfg.num_nodes; ++i)
            if (r.executes_per_node.at(i) != 1000) {
                ok = false;
                why = "node " + std::to_string(i) + " missed requests";
            }
    if (ok && r.wall_seconds > 60.0) {
        ok = false;
        why = "took " + std::to_string(r.wall_seconds) + "s, limit 60s";
    }
    report(2, ok,
           "1000 requests, window 400: checks pass in " + std::to_string(r.wall_seconds) +
               "s (reference hardware figure: 4.8s)" + (ok ? "" : " (" + why + ")"));
}

TEST_CASE("criterion 3: window of one neither deadlocks nor overruns") {
    bool ok = true;
    std::string why;
    for (uint64_t seed = 1; seed <= 100 && ok; ++seed) {
        SimConfig cfg;
        cfg.window_size = 1;
        cfg.requests_per_client = 50;
        cfg.seed = seed;
        RunResult r = run_and_check(cfg);
        if (!all_pass(r, &why)) {
            ok = false;
            why = "seed " + std::to_string(seed) + ": " + why;
        }
    }

    // The known-bad guard must be caught by the no-overwrite assertion.
    bool caught = false;
    uint64_t caught_seed = 0;
    for (uint64_t seed = 1; seed <= 100 && !caught; ++seed) {
        SimConfig cfg;
        cfg.window_size = 1;
        cfg.requests_per_client = 50;
        cfg.buffer_guard = BufferGuard::Overwrite;
        cfg.seed = seed;
        RunResult r = Simulator(cfg).run();
        if (!r.violations.empty()) {
            caught = true;
            caught_seed = seed;
        }
    }
    if (ok && !caught) {
        ok = false;
        why = "overwrite guard variant was never flagged";
    }
    report(3, ok,
           "window 1, 50 requests, 100 seeds: no deadlock, window bound held" +
               (caught ? "; overwrite variant flagged at seed " + std::to_string(caught_seed)
                       : "") +
               (ok ? "" : " (" + why + ")"));
}

TEST_CASE("criterion 4: staggered failure detection converges; the old selection does not") {
    bool ok = true;
    std::string why;
    for (uint64_t seed = 1; seed <= 100 && ok; ++seed) {
        SimConfig cfg;
        cfg.test_failure = true;
        cfg.fail_node = 0;
        cfg.fail_after = 100;
        cfg.detection_stagger = 200;
        cfg.max_steps = 500000;
        cfg.seed = seed;
        RunResult r = run_and_check(cfg);
        if (!all_pass(r, &why) || r.max_vid != 1) {
            ok = false;
            why = "seed " + std::to_string(seed) + ": " +
                  (r.max_vid != 1 ? "no new view installed" : why);
        }
    }

    bool exhausted = false;
    uint64_t exhausted_seed = 0;
    for (uint64_t seed = 1; seed <= 100 && !exhausted; ++seed) {
        SimConfig cfg;
        cfg.test_failure = true;
        cfg.fail_node = 0;
        cfg.fail_after = 100;
        cfg.detection_stagger = 200;
        cfg.max_steps = 60000;
        cfg.leader_mode = LeaderMode::Buggy;
        cfg.seed = seed;
        RunResult r = Simulator(cfg).run();
        if (r.status == SimStatus::BudgetExhausted) {
            exhausted = true;
            exhausted_seed = seed;
        }
    }
    if (ok && !exhausted) {
        ok = false;
        why = "pre-fix leader selection never exhausted its budget";
    }
    report(4, ok,
           "staggered suspicion, 100 seeds: all install the new view" +
               (exhausted ? "; pre-fix selection stalls at seed " +
                                std::to_string(exhausted_seed)
                          : "") +
               (ok ? "" : " (" + why + ")"));
}

TEST_CASE("criterion 5: single-crash sweep holds all safety properties") {
    bool ok = true;
    std::string why;
    int runs = 0;
    for (int nodes : {3, 5}) {
        for (int requests : {10, 100}) {
            for (int window : {1, 10, 400}) {
                for (uint64_t seed = 1; seed <= 20 && ok; ++seed) {
                    SimConfig cfg;
                    cfg.num_nodes = nodes;
                    cfg.requests_per_client = requests;
                    cfg.window_size = window;
                    cfg.test_failure = true;
                    cfg.fail_node = static_cast<int>(seed % nodes);
                    cfg.fail_after = 150;
                    cfg.seed = seed;
                    RunResult r = run_and_check(cfg);
                    ++runs;
                    if (!all_pass(r, &why) || r.max_vid != 1 || !r.views.count(1)) {
                        ok = false;
                        why = "nodes=" + std::to_string(nodes) +
                              " requests=" + std::to_string(requests) +
                              " window=" + std::to_string(window) +
                              " seed=" + std::to_string(seed) + ": " +
                              (r.max_vid != 1 ? "survivors never installed the new view"
                                              : why);
                    }
                }
            }
        }
    }
    report(5, ok,
           std::to_string(runs) +
               " crash runs over {3,5} nodes x {10,100} requests x {1,10,400} window: "
               "all properties hold, survivors agree on the new view" +
               (ok ? "" : " (" + why + ")"));
}

TEST_CASE("criterion 6: the checker catches every injected fault") {
    using Mutator = Mutation (*)(const std::vector<ProtocolEvent>&, std::mt19937_64&);
    struct Case {
        const char* property;
        Mutator mutate;
        bool needs_crash;
    };
    const Case cases[] = {
        {"delivery_ordering", mutate_delivery_ordering, false},
        {"validity", mutate_validity, false},
        {"agreement", mutate_agreement, false},
        {"uniform_integrity", mutate_uniform_integrity, false},
        {"progress_counts", mutate_progress_counts, false},
        {"virtual_synchrony", mutate_virtual_synchrony, true},
    };

    SimConfig clean_cfg;
    clean_cfg.requests_per_client = 8;
    clean_cfg.num_clients = 2;
    clean_cfg.seed = 3;
    RunResult clean = run_and_check(clean_cfg);

    SimConfig crash_cfg;
    crash_cfg.test_failure = true;
    crash_cfg.fail_node = 1;
    crash_cfg.fail_after = 80;
    crash_cfg.requests_per_client = 15;
    crash_cfg.seed = 3;
    RunResult crashed = run_and_check(crash_cfg);

    bool ok = clean.ok() && crashed.ok();
    std::string why = ok ? "" : "base traces are not clean";

    std::mt19937_64 rng(2718);
    int total = 0;
    for (const Case& c : cases) {
        for (int i = 0; i < 20 && ok; ++i) {
            Mutation m = c.mutate(c.needs_crash ? crashed.trace : clean.trace, rng);
            Checker checker;
            for (const auto& e : m.trace) checker.feed(e);
            bool found = false;
            for (const auto& v : checker.verdicts(true)) {
                if (v.property != c.property) continue;
                if (v.outcome != Outcome::Fail) break;
                for (const auto& inj : m.injected)
                    for (const auto& ce : v.counterexample)
                        if (ce == inj) found = true;
            }
            if (!found) {
                ok = false;
                why = std::string(c.property) + " mutation " + std::to_string(i) +
                      " was not caught with the injected event";
            }
            ++total;
        }
    }
    report(6, ok,
           std::to_string(total) +
               " mutated traces (20 per property): each fails its property with the "
               "injected events in the counterexample" + (ok ? "" : " (" + why + ")"));
}

TEST_CASE("criterion 7: micro configurations match brute-force delivery enumeration") {
    bool ok = true;
    std::string why;
    int runs = 0;
    for (int nodes = 1; nodes <= 3 && ok; ++nodes) {
        for (int requests = 0; requests <= 6 && ok; ++requests) {
            for (int window = 1; window <= 2 && ok; ++window) {
                for (uint64_t seed = 1; seed <= 3 && ok; ++seed) {
                    SimConfig cfg;
                    cfg.num_nodes = nodes;
                    cfg.requests_per_client = requests;
                    cfg.window_size = window;
                    cfg.seed = seed;
                    RunResult r = run_and_check(cfg);
                    ++runs;
                    if (!all_pass(r, &why) || !delivered_matches_roundrobin(r, &why)) {
                        ok = false;
                        why = "nodes=" + std::to_string(nodes) +
                              " requests=" + std::to_string(requests) +
                              " window=" + std::to_string(window) +
                              " seed=" + std::to_string(seed) + ": " + why;
                    }
                }
            }
        }
    }
    report(7, ok,
           std::to_string(runs) +
               " micro runs (up to 3 nodes, 6 requests, window 2): delivered sequences "
               "equal the enumerated round-robin schedule, nulls included" +
               (ok ? "" : " (" + why + ")"));
}

TEST_CASE("criterion 8: every configuration replays byte-identically") {
    std::mt19937_64 rng(2024);
    bool ok = true;
    std::string why;
    for (int i = 0; i < 50 && ok; ++i) {
        SimConfig cfg;
        cfg.num_nodes = 2 + static_cast<int>(rng() % 4);
        cfg.num_clients = 1 + static_cast<int>(rng() % 3);
        cfg.requests_per_client = static_cast<int>(rng() % 21);
        cfg.window_size = 1 + static_cast<int>(rng() % 8);
        cfg.seed = rng();
        if (cfg.num_nodes >= 3 && rng() % 2 == 0) {
            cfg.test_failure = true;
            cfg.fail_node = static_cast<int>(rng() % cfg.num_nodes);
            cfg.fail_after = 50 + static_cast<long long>(rng() % 200);
            cfg.detection_stagger = static_cast<long long>(rng() % 100);
        }
        RunResult a = Simulator(cfg).run();
        RunResult b = Simulator(cfg).run();
        if (a.status != SimStatus::Quiescent) {
            ok = false;
            why = "config " + std::to_string(i) + " did not quiesce";
        } else if (trace_bytes(a) != trace_bytes(b)) {
            ok = false;
            why = "config " + std::to_string(i) + " produced diverging traces";
        }
    }
    report(8, ok,
           "50 random configurations, two runs each: traces byte-identical" +
               (ok ? "" : " (" + why + ")"));
}
