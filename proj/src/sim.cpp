#include "derecho/sim.hpp"

#include <algorithm>
#include <chrono>

namespace derecho {

const char* status_name(SimStatus s) {
    switch (s) {
        case SimStatus::Running: return "running";
        case SimStatus::Quiescent: return "quiescent";
        case SimStatus::BudgetExhausted: return "budget-exhausted";
    }
    return "?";
}

bool RunResult::checks_passed() const {
    return std::all_of(verdicts.begin(), verdicts.end(),
                       [](const Verdict& v) { return v.passed(); });
}

bool ClientActor::turn(long long now, const std::function<void(int, Request)>& send) {
    if (next_rid_ < cfg_.requests_per_client) {
        int rid = next_rid_++;
        Request req{client_id_, rid, "c" + std::to_string(client_id_) + "-r" + std::to_string(rid)};
        int target = rid % cfg_.num_nodes;
        awaiting_[rid] = Outstanding{req, now, target};
        send(target, req);
        return true;
    }
    for (auto& [rid, out] : awaiting_) {
        if (now - out.last_sent > cfg_.resend_timeout) {
            out.target = (out.target + 1) % cfg_.num_nodes;
            out.last_sent = now;
            send(out.target, out.req);
            return true;
        }
    }
    return false;
}

void ClientActor::on_response(int request_id) {
    if (awaiting_.erase(request_id)) responded_++;
}

Simulator::Simulator(SimConfig cfg, Observer observer)
    : cfg_(std::move(cfg)), observer_(std::move(observer)) {
    cfg_.validate();
    rng_.seed(cfg_.seed);
    crashed_.assign(static_cast<size_t>(cfg_.num_nodes), false);
    std::vector<NodeId> members(static_cast<size_t>(cfg_.num_nodes));
    for (int i = 0; i < cfg_.num_nodes; ++i) members[static_cast<size_t>(i)] = i;
    for (int i = 0; i < cfg_.num_nodes; ++i)
        nodes_.push_back(std::make_unique<Node>(i, View(0, members, i), cfg_, *this));
    for (int c = 0; c < cfg_.num_clients; ++c) clients_.emplace_back(c, cfg_);
}

void Simulator::enqueue(int src, int dst, Message m) {
    if (dst < cfg_.num_nodes && crashed_[static_cast<size_t>(dst)]) return;
    auto key = std::make_pair(src, dst);
    channels_[key].push_back(Envelope{send_seq_[key]++, std::move(m)});
}

void Simulator::send_row(NodeId src, NodeId dst, RowUpdate update) {
    enqueue(src, dst, std::move(update));
}

void Simulator::respond(NodeId src, int client_id, int request_id) {
    if (client_id < 0 || client_id >= cfg_.num_clients) return;
    enqueue(src, client_addr(client_id), ClientResponse{client_id, request_id});
}

void Simulator::emit(ProtocolEvent e) {
    e.step = step_;
    if (observer_) observer_(e);
    result_.trace.push_back(std::move(e));
}

void Simulator::report_violation(std::string what) {
    if (result_.violations.size() < 200)
        result_.violations.push_back("step " + std::to_string(step_) + ": " + std::move(what));
}

void Simulator::record_send(NodeId node, int vid, const std::optional<Request>& payload) {
    auto vit = result_.views.find(vid);
    if (vit == result_.views.end()) {
        report_violation("send recorded for unknown view " + std::to_string(vid));
        return;
    }
    auto& per_rank = result_.send_log[vid];
    per_rank.resize(vit->second.size());
    auto it = std::find(vit->second.begin(), vit->second.end(), node);
    if (it == vit->second.end()) {
        report_violation("send recorded for non-member node " + std::to_string(node));
        return;
    }
    per_rank[static_cast<size_t>(it - vit->second.begin())].push_back(payload);
}

void Simulator::record_install(NodeId node, const View& view) {
    result_.max_vid = std::max(result_.max_vid, view.vid);
    auto [it, inserted] = result_.views.emplace(view.vid, view.members);
    if (!inserted && it->second != view.members)
        report_violation("divergent views installed for vid " + std::to_string(view.vid) +
                         " (node " + std::to_string(node) + ")");
}

void Simulator::check_slot_reuse(NodeId sender, int slot, long long old_seq) {
    const Node& s = *nodes_[static_cast<size_t>(sender)];
    for (int i = 0; i < cfg_.num_nodes; ++i) {
        if (i == sender || crashed_[static_cast<size_t>(i)]) continue;
        const Node& peer = *nodes_[static_cast<size_t>(i)];
        if (peer.halted() || peer.view().vid != s.view().vid) continue;
        int rank = peer.view().rank_of(sender);
        if (rank < 0) continue;
        if (peer.own_row().received_num[static_cast<size_t>(rank)] <= old_seq)
            report_violation("ring-buffer overwrite: node " + std::to_string(sender) +
                             " reused slot " + std::to_string(slot) + " (seq " +
                             std::to_string(old_seq) + ") before node " + std::to_string(i) +
                             " received it");
    }
}

void Simulator::crash(int node) {
    if (node < 0 || node >= cfg_.num_nodes) return;
    if (crashed_[static_cast<size_t>(node)]) return;
    crashed_[static_cast<size_t>(node)] = true;
    // Undeliverable: everything already queued toward the crashed node.
    for (auto& [key, q] : channels_)
        if (key.second == node) q.clear();
    if (cfg_.detection_delay >= 0) {
        int idx = 0;
        for (int i = 0; i < cfg_.num_nodes; ++i) {
            if (i == node || crashed_[static_cast<size_t>(i)]) continue;
            pending_notices_.emplace_back(
                step_ + cfg_.detection_delay + cfg_.detection_stagger * idx, i);
            ++idx;
        }
    }
}

void Simulator::fire_crash() {
    crash_fired_ = true;
    crash(cfg_.fail_node);
}

void Simulator::invariant_sweep() {
    for (int i = 0; i < cfg_.num_nodes; ++i) {
        if (crashed_[static_cast<size_t>(i)]) continue;
        const Node& n = *nodes_[static_cast<size_t>(i)];
        if (n.halted()) continue;
        long long in_flight = n.sent_num() - n.completed_num();
        if (in_flight < 0 || in_flight > cfg_.window_size)
            report_violation("window bound violated at node " + std::to_string(i) +
                             ": sent=" + std::to_string(n.sent_num()) +
                             " completed=" + std::to_string(n.completed_num()));
        const SSTRow& row = n.own_row();
        bool ordered = row.num_installed <= row.num_committed &&
                       row.num_committed <= row.num_acked &&
                       row.num_acked <= row.num_changes &&
                       row.num_changes <= static_cast<int>(row.changes.size());
        if (!ordered)
            report_violation("membership counter ordering violated at node " + std::to_string(i));
    }
}

bool Simulator::quiescence_candidate() const {
    for (const auto& [key, q] : channels_)
        if (!q.empty()) return false;
    if (!pending_notices_.empty()) return false;
    if (cfg_.test_failure && !crash_fired_) return false;
    for (const auto& c : clients_)
        if (!c.done()) return false;
    return true;
}

void Simulator::deliver(int src, int dst) {
    auto key = std::make_pair(src, dst);
    auto& q = channels_[key];
    Envelope env = std::move(q.front());
    q.pop_front();
    if (env.seq != recv_seq_[key]++)
        report_violation("FIFO order broken on channel " + std::to_string(src) + "->" +
                         std::to_string(dst));
    if (dst >= cfg_.num_nodes) {
        if (const auto* r = std::get_if<ClientResponse>(&env.msg))
            clients_[static_cast<size_t>(dst - cfg_.num_nodes)].on_response(r->request_id);
        return;
    }
    if (crashed_[static_cast<size_t>(dst)]) return;
    nodes_[static_cast<size_t>(dst)]->handle(env.msg);
}

SimStatus Simulator::step() {
    if (step_ >= cfg_.max_steps) return SimStatus::BudgetExhausted;

    if (cfg_.test_failure && !crash_fired_ && step_ >= cfg_.fail_after) fire_crash();
    for (auto it = pending_notices_.begin(); it != pending_notices_.end();) {
        if (it->first <= step_) {
            NodeId survivor = it->second;
            it = pending_notices_.erase(it);
            if (!crashed_[static_cast<size_t>(survivor)])
                nodes_[static_cast<size_t>(survivor)]->handle(CrashNotice{cfg_.fail_node});
        } else {
            ++it;
        }
    }

    if (quiescence_candidate()) {
        bool any = false;
        for (int i = 0; i < cfg_.num_nodes; ++i)
            if (!crashed_[static_cast<size_t>(i)]) any |= nodes_[static_cast<size_t>(i)]->sweep();
        step_++;
        invariant_sweep();
        return any ? SimStatus::Running : SimStatus::Quiescent;
    }

    struct Action {
        enum Kind { Deliver, NodeTurn, ClientTurn } kind;
        int a = 0, b = 0;
    };
    std::vector<Action> actions;
    for (const auto& [key, q] : channels_)
        if (!q.empty()) actions.push_back({Action::Deliver, key.first, key.second});
    for (int i = 0; i < cfg_.num_nodes; ++i)
        if (!crashed_[static_cast<size_t>(i)] && !nodes_[static_cast<size_t>(i)]->halted())
            actions.push_back({Action::NodeTurn, i, 0});
    for (int c = 0; c < cfg_.num_clients; ++c)
        if (!clients_[static_cast<size_t>(c)].done()) actions.push_back({Action::ClientTurn, c, 0});

    if (actions.empty()) {
        // Nothing enabled yet; jump to the next scheduled event if one exists.
        long long next = cfg_.max_steps;
        if (cfg_.test_failure && !crash_fired_) next = std::min(next, cfg_.fail_after);
        for (const auto& [due, _] : pending_notices_) next = std::min(next, due);
        if (next <= step_ || next >= cfg_.max_steps) {
            report_violation("no enabled actions and no scheduled events");
            return SimStatus::BudgetExhausted;
        }
        step_ = next;
        return SimStatus::Running;
    }

    const Action& act = actions[rng_() % actions.size()];
    switch (act.kind) {
        case Action::Deliver:
            deliver(act.a, act.b);
            break;
        case Action::NodeTurn:
            nodes_[static_cast<size_t>(act.a)]->take_turn();
            break;
        case Action::ClientTurn:
            clients_[static_cast<size_t>(act.a)].turn(step_, [&](int target, Request req) {
                enqueue(client_addr(act.a), target, ClientRequest{std::move(req)});
            });
            break;
    }
    step_++;
    invariant_sweep();
    return SimStatus::Running;
}

RunResult Simulator::run() {
    auto t0 = std::chrono::steady_clock::now();
    SimStatus s = SimStatus::Running;
    while (s == SimStatus::Running) s = step();
    result_.status = s;
    result_.steps = step_;
    for (const auto& e : result_.trace)
        if (e.kind == EventKind::Execute) result_.executes_per_node[e.node]++;
    result_.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result_;
}

RunResult run_and_check(const SimConfig& cfg) {
    Checker checker;
    Simulator sim(cfg, [&checker](const ProtocolEvent& e) { checker.feed(e); });
    RunResult r = sim.run();
    r.verdicts = checker.verdicts(r.status == SimStatus::Quiescent);
    return r;
}

}  // namespace derecho
