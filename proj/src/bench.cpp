#include "derecho/bench.hpp"

#include <atomic>
#include <chrono>
#include <deque>
#include <mutex>
#include <thread>

#include "derecho/node.hpp"

namespace derecho {

namespace {

class Mailbox {
public:
    void push(Message m) {
        std::lock_guard<std::mutex> lock(mu_);
        q_.push_back(std::move(m));
    }
    bool pop(Message& out) {
        std::lock_guard<std::mutex> lock(mu_);
        if (q_.empty()) return false;
        out = std::move(q_.front());
        q_.pop_front();
        return true;
    }

private:
    std::mutex mu_;
    std::deque<Message> q_;
};

struct ClientState {
    Mailbox inbox;
    std::atomic<int> responded{0};
};

class Router;

// Per-node environment; all node state is touched only by the node's thread.
class ThreadedServices : public NodeServices {
public:
    ThreadedServices(Router& router, int node) : router_(router), node_(node) {}

    void send_row(NodeId src, NodeId dst, RowUpdate update) override;
    void respond(NodeId src, int client_id, int request_id) override;
    void emit(ProtocolEvent e) override { events_.push_back(std::move(e)); }
    void report_violation(std::string) override {}
    long long now() const override {
        return std::chrono::steady_clock::now().time_since_epoch().count();
    }

    std::vector<ProtocolEvent> events_;

private:
    Router& router_;
    int node_;
};

class Router {
public:
    Router(int num_nodes, int num_clients) : clients_(static_cast<size_t>(num_clients)) {
        for (int i = 0; i < num_nodes; ++i) node_boxes_.push_back(std::make_unique<Mailbox>());
        for (int c = 0; c < num_clients; ++c) clients_[static_cast<size_t>(c)] = std::make_unique<ClientState>();
    }
    void to_node(int node, Message m) { node_boxes_[static_cast<size_t>(node)]->push(std::move(m)); }
    void to_client(int client, Message m) { clients_[static_cast<size_t>(client)]->inbox.push(std::move(m)); }
    Mailbox& node_box(int node) { return *node_boxes_[static_cast<size_t>(node)]; }
    ClientState& client(int c) { return *clients_[static_cast<size_t>(c)]; }

private:
    std::vector<std::unique_ptr<Mailbox>> node_boxes_;
    std::vector<std::unique_ptr<ClientState>> clients_;
};

void ThreadedServices::send_row(NodeId, NodeId dst, RowUpdate update) {
    router_.to_node(dst, std::move(update));
}

void ThreadedServices::respond(NodeId, int client_id, int request_id) {
    router_.to_client(client_id, ClientResponse{client_id, request_id});
}

}  // namespace

BenchResult run_threaded(const SimConfig& cfg) {
    cfg.validate();
    BenchResult result;
    auto t0 = std::chrono::steady_clock::now();

    Router router(cfg.num_nodes, cfg.num_clients);
    std::atomic<bool> stop{false};

    std::vector<NodeId> members(static_cast<size_t>(cfg.num_nodes));
    for (int i = 0; i < cfg.num_nodes; ++i) members[static_cast<size_t>(i)] = i;

    std::vector<std::unique_ptr<ThreadedServices>> services;
    for (int i = 0; i < cfg.num_nodes; ++i)
        services.push_back(std::make_unique<ThreadedServices>(router, i));

    std::vector<std::thread> threads;
    for (int i = 0; i < cfg.num_nodes; ++i) {
        threads.emplace_back([&, i] {
            Node node(i, View(0, members, i), cfg, *services[static_cast<size_t>(i)]);
            Mailbox& box = router.node_box(i);
            Message m;
            while (!stop.load(std::memory_order_relaxed)) {
                bool busy = false;
                while (box.pop(m)) {
                    node.handle(m);
                    busy = true;
                }
                busy |= node.sweep();
                if (!busy) std::this_thread::yield();
            }
        });
    }

    for (int c = 0; c < cfg.num_clients; ++c) {
        threads.emplace_back([&, c] {
            ClientState& me = router.client(c);
            for (int rid = 0; rid < cfg.requests_per_client; ++rid) {
                Request req{c, rid, "c" + std::to_string(c) + "-r" + std::to_string(rid)};
                router.to_node(rid % cfg.num_nodes, ClientRequest{req});
            }
            Message m;
            std::vector<bool> done(static_cast<size_t>(cfg.requests_per_client), false);
            while (me.responded.load() < cfg.requests_per_client &&
                   !stop.load(std::memory_order_relaxed)) {
                if (me.inbox.pop(m)) {
                    // Every node responds; count each request once.
                    if (const auto* r = std::get_if<ClientResponse>(&m)) {
                        if (!done[static_cast<size_t>(r->request_id)]) {
                            done[static_cast<size_t>(r->request_id)] = true;
                            me.responded.fetch_add(1);
                        }
                    }
                } else {
                    std::this_thread::yield();
                }
            }
        });
    }

    // Wait for all clients to finish, with a generous wall-clock cap.
    auto deadline = t0 + std::chrono::seconds(120);
    bool completed = false;
    while (std::chrono::steady_clock::now() < deadline) {
        completed = true;
        for (int c = 0; c < cfg.num_clients; ++c) {
            // Responses arrive once per node; count distinct requests done.
            if (router.client(c).responded.load() < cfg.requests_per_client) completed = false;
        }
        if (completed) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    stop.store(true);
    for (auto& t : threads) t.join();

    result.completed = completed;
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (auto& svc : services)
        for (auto& e : svc->events_) {
            if (e.kind == EventKind::Execute) result.executes++;
            result.merged_trace.push_back(e);
        }
    return result;
}

}  // namespace derecho
