#pragma once

#include <deque>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "derecho/config.hpp"
#include "derecho/events.hpp"
#include "derecho/messages.hpp"
#include "derecho/sst.hpp"

namespace derecho {

// Environment a node runs in. The simulator implements this; the threaded
// benchmark runner provides its own implementation.
class NodeServices {
public:
    virtual ~NodeServices() = default;

    virtual void send_row(NodeId src, NodeId dst, RowUpdate update) = 0;
    virtual void respond(NodeId src, int client_id, int request_id) = 0;
    virtual void emit(ProtocolEvent e) = 0;
    virtual void report_violation(std::string what) = 0;
    virtual long long now() const = 0;

    // Hooks used only by the checking-mode simulator; default to no-ops.
    virtual void record_send(NodeId, int /*vid*/, const std::optional<Request>&) {}
    virtual void record_install(NodeId, const View&) {}
    virtual void check_slot_reuse(NodeId, int /*slot*/, long long /*old_seq*/) {}
};

// One protocol node: SST ownership, steady-state multicast, and view change.
// All methods run inside the owning actor's turn; the class itself is
// single-threaded.
class Node {
public:
    Node(NodeId id, View initial_view, const SimConfig& cfg, NodeServices& svc);

    void handle(const Message& m);

    // One randomly chosen action; returns true if any state changed.
    bool take_turn();

    // Every action once, in a fixed order; used for quiescence detection.
    bool sweep();

    bool halted() const { return halted_; }

    NodeId id() const { return id_; }
    const View& view() const { return view_; }
    const std::vector<SSTRow>& sst() const { return sst_; }
    const SSTRow& own_row() const { return sst_[static_cast<size_t>(view_.my_rank)]; }
    long long sent_num() const { return sent_num_; }
    long long completed_num() const { return completed_num_; }
    bool wedged() const { return wedged_; }
    size_t parked_count() const { return parked_.size(); }
    size_t pending_count() const { return pending_.size(); }
    int current_leader() const { return current_leader_; }

    // Exposed for unit tests driving the steady-state path directly.
    std::optional<int> get_buffer();
    void on_client_request(const Request& req);
    bool receive_req();
    bool stability_delivery();
    bool send_null_if_stalled();
    bool membership_step();
    bool retry_parked();

    static long long round_robin_index(int sender_rank, long long k, int n);
    static int find_new_leader(const SSTRow& row);

private:
    SSTRow& own_row_mut() { return sst_[static_cast<size_t>(view_.my_rank)]; }

    void publish();
    void send_req(const std::optional<Request>& payload);
    void recv(int sender_rank, long long k, const std::optional<Request>& payload);
    void deliver_upcall(long long gidx, const Request& req);
    void execute(long long gidx, const Request& req);
    void suspect(int rank);
    bool leader_selection();
    void do_trim_and_install(long long trim);
    void emit_event(EventKind kind, long long gidx, const Request* req);
    void wedge();

    NodeId id_;
    SimConfig cfg_;
    NodeServices& svc_;

    View view_;
    std::vector<SSTRow> sst_;

    // Steady state.
    long long sent_num_ = 0;
    long long completed_num_ = 0;
    std::map<long long, std::optional<Request>> pending_;  // gidx -> payload
    long long next_deliver_ = 0;
    std::vector<std::optional<Request>> own_sends_;        // this view's sends, by k
    std::set<RequestKey> seen_requests_;
    std::set<RequestKey> responded_;
    std::deque<Request> parked_;
    bool wedged_ = false;
    bool halted_ = false;
    long long t_ = 0;

    // View change.
    int current_leader_ = 0;
    bool is_agreed_leader_ = false;
    bool buggy_agree_entered_ = false;
    bool buggy_all_agree_ = true;
    std::vector<long long> last_row_step_;  // per rank, for the timeout detector

    // Row updates from views we have not installed yet, latest per sender.
    std::map<std::pair<int, NodeId>, SSTRow> future_rows_;

    std::mt19937_64 rng_;
};

}  // namespace derecho
