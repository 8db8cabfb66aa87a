#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "derecho/checker.hpp"
#include "derecho/config.hpp"
#include "derecho/node.hpp"

namespace derecho {

enum class SimStatus { Running, Quiescent, BudgetExhausted };

const char* status_name(SimStatus s);

struct RunResult {
    SimStatus status = SimStatus::Running;
    long long steps = 0;
    std::vector<ProtocolEvent> trace;
    std::vector<std::string> violations;
    std::map<int, std::vector<NodeId>> views;  // vid -> member list, as installed
    // vid -> per-rank send sequences (nullopt entries are null messages).
    std::map<int, std::vector<std::vector<std::optional<Request>>>> send_log;
    std::map<int, long long> executes_per_node;
    int max_vid = 0;
    double wall_seconds = 0;
    std::vector<Verdict> verdicts;  // filled by run_and_check

    bool checks_passed() const;
    bool ok() const { return status == SimStatus::Quiescent && violations.empty() && checks_passed(); }
};

// Driver for one client: issues requests round-robin over the initial member
// set and resends on response timeout.
class ClientActor {
public:
    ClientActor(int client_id, const SimConfig& cfg) : client_id_(client_id), cfg_(cfg) {}

    bool done() const { return responded_ == cfg_.requests_per_client; }
    bool turn(long long now, const std::function<void(int target, Request)>& send);
    void on_response(int request_id);

private:
    int client_id_;
    SimConfig cfg_;
    int next_rid_ = 0;
    int responded_ = 0;
    struct Outstanding {
        Request req;
        long long last_sent = 0;
        int target = 0;
    };
    std::map<int, Outstanding> awaiting_;
};

// Deterministic single-threaded event loop: per-pair FIFO channels, seeded
// interleaving, crash injection, quiescence detection.
class Simulator : public NodeServices {
public:
    using Observer = std::function<void(const ProtocolEvent&)>;

    explicit Simulator(SimConfig cfg, Observer observer = nullptr);

    SimStatus step();
    RunResult run();

    const Node& node(int id) const { return *nodes_[static_cast<size_t>(id)]; }
    bool node_crashed(int id) const { return crashed_[static_cast<size_t>(id)]; }
    long long current_step() const { return step_; }
    const RunResult& result() const { return result_; }

    void crash(int node);

    // NodeServices
    void send_row(NodeId src, NodeId dst, RowUpdate update) override;
    void respond(NodeId src, int client_id, int request_id) override;
    void emit(ProtocolEvent e) override;
    void report_violation(std::string what) override;
    long long now() const override { return step_; }
    void record_send(NodeId node, int vid, const std::optional<Request>& payload) override;
    void record_install(NodeId node, const View& view) override;
    void check_slot_reuse(NodeId sender, int slot, long long old_seq) override;

private:
    struct Envelope {
        long long seq;
        Message msg;
    };
    // Addresses: 0..n-1 nodes, n..n+c-1 clients.
    int client_addr(int client_id) const { return cfg_.num_nodes + client_id; }

    void enqueue(int src, int dst, Message m);
    void deliver(int src, int dst);
    void fire_crash();
    void invariant_sweep();
    bool quiescence_candidate() const;

    SimConfig cfg_;
    Observer observer_;
    std::vector<std::unique_ptr<Node>> nodes_;
    std::vector<bool> crashed_;
    std::vector<ClientActor> clients_;
    std::map<std::pair<int, int>, std::deque<Envelope>> channels_;
    std::map<std::pair<int, int>, long long> send_seq_, recv_seq_;
    std::vector<std::pair<long long, NodeId>> pending_notices_;  // (due step, survivor)
    bool crash_fired_ = false;
    long long step_ = 0;
    std::mt19937_64 rng_;
    RunResult result_;
};

// Runs a configuration to completion with the online checker attached.
RunResult run_and_check(const SimConfig& cfg);

}  // namespace derecho
