// Command-line front end: run one simulation, re-check a stored trace, sweep
// configurations, or benchmark the threaded runner against the deterministic
// scheduler.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "derecho/bench.hpp"
#include "derecho/sim.hpp"
#include "derecho/trace.hpp"

namespace {

using namespace derecho;

const char* outcome_name(Outcome o) {
    switch (o) {
        case Outcome::Pass: return "pass";
        case Outcome::Fail: return "FAIL";
        case Outcome::Indeterminate: return "indeterminate";
    }
    return "?";
}

void print_verdicts(const std::vector<Verdict>& verdicts) {
    for (const auto& v : verdicts) {
        std::printf("  %-20s %s\n", v.property.c_str(), outcome_name(v.outcome));
        if (v.outcome == Outcome::Fail) {
            if (!v.detail.empty()) std::printf("    %s\n", v.detail.c_str());
            for (const auto& e : v.counterexample)
                std::printf("    counterexample: %s\n", describe(e).c_str());
        }
    }
}

int print_run_summary(const RunResult& r) {
    std::printf("status: %s after %lld steps (%.3f s)\n", status_name(r.status), r.steps,
                r.wall_seconds);
    std::printf("views installed: %d (max vid %d)\n", static_cast<int>(r.views.size()),
                r.max_vid);
    for (const auto& [node, count] : r.executes_per_node)
        std::printf("node %d executed %lld requests\n", node, count);
    for (const auto& v : r.violations) std::printf("invariant violation: %s\n", v.c_str());
    print_verdicts(r.verdicts);
    return r.ok() ? 0 : 1;
}

void add_config_flags(CLI::App* app, SimConfig& cfg) {
    app->add_option("--nodes", cfg.num_nodes, "number of member nodes")->envname("DERECHO_NODES");
    app->add_option("--clients", cfg.num_clients, "number of clients")->envname("DERECHO_CLIENTS");
    app->add_option("--requests", cfg.requests_per_client, "requests per client")
        ->envname("DERECHO_REQUESTS");
    app->add_option("--window-size", cfg.window_size, "ring buffer window size")
        ->envname("DERECHO_WINDOW_SIZE");
    app->add_option("--fail-node", cfg.fail_node, "node to crash (with --fail-after)")
        ->envname("DERECHO_FAIL_NODE");
    auto* fa = app->add_option("--fail-after", cfg.fail_after, "scheduler step of the crash")
                   ->envname("DERECHO_FAIL_AFTER");
    fa->each([&cfg](const std::string&) { cfg.test_failure = true; });
    app->add_option("--seed", cfg.seed, "RNG seed")->envname("DERECHO_SEED");
    app->add_option("--max-steps", cfg.max_steps, "scheduler step budget")
        ->envname("DERECHO_MAX_STEPS");
    app->add_option("--detection-delay", cfg.detection_delay,
                    "steps until survivors hear about a crash")
        ->envname("DERECHO_DETECTION_DELAY");
    app->add_option("--resend-timeout", cfg.resend_timeout, "client resend period in steps")
        ->envname("DERECHO_RESEND_TIMEOUT");
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stoi(item));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Derecho protocol simulator and runtime checker"};
    app.require_subcommand(1);

    SimConfig cfg;
    std::string trace_out;
    bool no_check = false;

    auto* run_cmd = app.add_subcommand("run", "run one simulation and check it");
    add_config_flags(run_cmd, cfg);
    run_cmd->add_option("--trace-out", trace_out, "write the event trace to this file")
        ->envname("DERECHO_TRACE_OUT");
    run_cmd->add_flag("--no-check", no_check, "skip property checking");

    std::string trace_path;
    auto* recheck_cmd = app.add_subcommand("recheck", "re-run all checks on a stored trace");
    recheck_cmd->add_option("trace", trace_path, "trace file")->required();

    std::string nodes_list = "3", requests_list = "10", windows_list = "10";
    int sweep_seeds = 5;
    bool sweep_fail = false;
    SimConfig sweep_base;
    auto* sweep_cmd = app.add_subcommand("sweep", "run a configuration cross-product");
    sweep_cmd->add_option("--nodes", nodes_list, "comma-separated node counts");
    sweep_cmd->add_option("--requests", requests_list, "comma-separated request counts");
    sweep_cmd->add_option("--windows", windows_list, "comma-separated window sizes");
    sweep_cmd->add_option("--seeds", sweep_seeds, "seeds per configuration");
    sweep_cmd->add_flag("--fail", sweep_fail, "inject a crash of node 0 in every run");
    sweep_cmd->add_option("--fail-after", sweep_base.fail_after, "crash step");
    sweep_cmd->add_option("--max-steps", sweep_base.max_steps, "step budget per run");

    SimConfig bench_cfg;
    auto* bench_cmd = app.add_subcommand(
        "bench", "compare deterministic and threaded runners on one configuration");
    add_config_flags(bench_cmd, bench_cfg);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            cfg.validate();
            RunResult r;
            if (no_check) {
                Simulator sim(cfg);
                r = sim.run();
            } else {
                r = run_and_check(cfg);
            }
            if (!trace_out.empty()) write_trace_file(trace_out, r.trace);
            return print_run_summary(r);
        }

        if (recheck_cmd->parsed()) {
            std::vector<ProtocolEvent> events;
            try {
                events = read_trace_file(trace_path);
            } catch (const TraceParseError& e) {
                std::fprintf(stderr, "%s: %s\n", trace_path.c_str(), e.what());
                return 2;
            }
            Checker checker;
            for (const auto& e : events) checker.feed(e);
            auto verdicts = checker.verdicts(/*quiescent=*/true);
            print_verdicts(verdicts);
            bool ok = std::all_of(verdicts.begin(), verdicts.end(),
                                  [](const Verdict& v) { return v.passed(); });
            return ok ? 0 : 1;
        }

        if (sweep_cmd->parsed()) {
            auto nodes = parse_int_list(nodes_list);
            auto requests = parse_int_list(requests_list);
            auto windows = parse_int_list(windows_list);
            if (nodes.empty() || requests.empty() || windows.empty() || sweep_seeds < 1) {
                std::fprintf(stderr, "sweep: empty range\n");
                return 2;
            }
            int total = 0, failed = 0;
            std::vector<std::string> failing;
            for (int n : nodes)
                for (int req : requests)
                    for (int w : windows)
                        for (int s = 0; s < sweep_seeds; ++s) {
                            SimConfig c = sweep_base;
                            c.num_nodes = n;
                            c.requests_per_client = req;
                            c.window_size = w;
                            c.seed = static_cast<uint64_t>(s + 1);
                            c.test_failure = sweep_fail;
                            c.fail_node = 0;
                            RunResult r = run_and_check(c);
                            ++total;
                            if (!r.ok()) {
                                ++failed;
                                std::ostringstream os;
                                os << "nodes=" << n << " requests=" << req << " window=" << w
                                   << " seed=" << c.seed
                                   << (sweep_fail ? " fail-node=0" : "");
                                failing.push_back(os.str());
                            }
                        }
            std::printf("sweep: %d runs, %d passed, %d failed\n", total, total - failed, failed);
            for (const auto& f : failing) std::printf("  FAILING: %s\n", f.c_str());
            return failed == 0 ? 0 : 1;
        }

        if (bench_cmd->parsed()) {
            bench_cfg.validate();
            Simulator sim(bench_cfg);
            RunResult det = sim.run();
            std::printf("deterministic: %s, %lld steps, %.3f s\n", status_name(det.status),
                        det.steps, det.wall_seconds);
            BenchResult thr = run_threaded(bench_cfg);
            std::printf("threaded:      %s, %lld executes, %.3f s\n",
                        thr.completed ? "completed" : "INCOMPLETE", thr.executes,
                        thr.wall_seconds);
            return (det.status == SimStatus::Quiescent && thr.completed) ? 0 : 1;
        }
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid configuration: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
