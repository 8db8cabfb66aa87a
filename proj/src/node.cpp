#include "derecho/node.hpp"

#include <algorithm>
#include <cassert>

namespace derecho {

Node::Node(NodeId id, View initial_view, const SimConfig& cfg, NodeServices& svc)
    : id_(id), cfg_(cfg), svc_(svc), view_(std::move(initial_view)) {
    int n = view_.num_members();
    sst_.assign(static_cast<size_t>(n), SSTRow::fresh(cfg_.window_size, n));
    last_row_step_.assign(static_cast<size_t>(n), svc_.now());
    current_leader_ = view_.leader_rank;
    is_agreed_leader_ = (view_.my_rank == view_.leader_rank);
    rng_.seed(cfg_.seed ^ (0x9e3779b97f4a7c15ull * static_cast<uint64_t>(id + 1)));
    emit_event(EventKind::ViewInstalled, -1, nullptr);
    svc_.record_install(id_, view_);
}

long long Node::round_robin_index(int sender_rank, long long k, int n) {
    if (sender_rank < 0 || sender_rank >= n || k < 0)
        throw std::logic_error("round_robin_index: rank or cycle out of range");
    return k * n + sender_rank;
}

int Node::find_new_leader(const SSTRow& row) {
    for (size_t r = 0; r < row.suspected.size(); ++r)
        if (!row.suspected[r]) return static_cast<int>(r);
    return -1;  // total failure; callers diagnose
}

void Node::emit_event(EventKind kind, long long gidx, const Request* req) {
    ProtocolEvent e;
    e.kind = kind;
    e.node = id_;
    e.vid = view_.vid;
    e.gidx = gidx;
    if (req) {
        e.client_id = req->client_id;
        e.request_id = req->request_id;
        e.digest = payload_digest(req->payload);
    }
    e.t = t_++;
    svc_.emit(e);
}

void Node::publish() {
    SSTRow& own = own_row_mut();
    own.write_count++;
    for (NodeId m : view_.members) {
        if (m == id_) continue;
        svc_.send_row(id_, m, RowUpdate{id_, view_.vid, own});
    }
}

void Node::handle(const Message& m) {
    if (halted_) return;
    if (const auto* u = std::get_if<RowUpdate>(&m)) {
        if (u->vid > view_.vid) {
            future_rows_[{u->vid, u->sender}] = u->row;  // keep latest per sender
            return;
        }
        if (u->vid < view_.vid) return;  // stale epoch
        int rank = view_.rank_of(u->sender);
        if (rank < 0) return;  // not a member of this view
        if (u->row.write_count < sst_[static_cast<size_t>(rank)].write_count)
            svc_.report_violation("single-writer violation: stale row from node " +
                                  std::to_string(u->sender));
        sst_[static_cast<size_t>(rank)] = u->row;  // wt_local_sst
        last_row_step_[static_cast<size_t>(rank)] = svc_.now();
        return;
    }
    if (const auto* c = std::get_if<ClientRequest>(&m)) {
        on_client_request(c->req);
        return;
    }
    if (const auto* f = std::get_if<CrashNotice>(&m)) {
        int rank = view_.rank_of(f->failed);
        if (rank >= 0 && rank != view_.my_rank) {
            suspect(rank);
            publish();
        }
        return;
    }
}

void Node::on_client_request(const Request& req) {
    emit_event(EventKind::RequestReceived, -1, &req);
    RequestKey key = key_of(req);
    if (seen_requests_.count(key)) return;  // duplicate, already queued or multicast
    seen_requests_.insert(key);
    parked_.push_back(req);
    retry_parked();
}

bool Node::retry_parked() {
    bool did = false;
    while (!wedged_ && !parked_.empty()) {
        auto slot = get_buffer();
        if (!slot) break;
        Request r = parked_.front();
        parked_.pop_front();
        send_req(r);
        did = true;
    }
    return did;
}

std::optional<int> Node::get_buffer() {
    long long in_flight = sent_num_ - completed_num_;
    if (cfg_.buffer_guard == BufferGuard::Exact) {
        if (in_flight == cfg_.window_size) return std::nullopt;
        if (in_flight > cfg_.window_size) {
            svc_.report_violation("get_buffer: sent_num - completed_num exceeds window");
            return std::nullopt;
        }
    } else {
        // Known-bad guard: lets in_flight == window_size through.
        if (in_flight > cfg_.window_size) return std::nullopt;
    }
    return static_cast<int>(sent_num_ % cfg_.window_size);
}

void Node::send_req(const std::optional<Request>& payload) {
    int idx = static_cast<int>(sent_num_ % cfg_.window_size);
    SSTRow& own = own_row_mut();
    Slot& slot = own.slots[static_cast<size_t>(idx)];
    if (slot.seq_num >= 0)
        svc_.check_slot_reuse(id_, idx, slot.seq_num);
    slot.payload = payload;
    slot.seq_num = sent_num_;
    own_sends_.push_back(payload);
    svc_.record_send(id_, view_.vid, payload);
    sent_num_++;
    publish();
}

bool Node::receive_req() {
    int n = view_.num_members();
    SSTRow& own = own_row_mut();
    bool did = false;
    for (int r = 0; r < n; ++r) {
        long long expected = own.received_num[static_cast<size_t>(r)];
        const Slot& s =
            sst_[static_cast<size_t>(r)].slots[static_cast<size_t>(expected % cfg_.window_size)];
        if (s.seq_num == expected) {
            recv(r, expected, s.payload);
            did = true;
        }
    }
    if (did) publish();
    return did;
}

void Node::recv(int sender_rank, long long k, const std::optional<Request>& payload) {
    int n = view_.num_members();
    long long gidx = round_robin_index(sender_rank, k, n);
    if (pending_.count(gidx)) {
        svc_.report_violation("recv: duplicate global index " + std::to_string(gidx));
        return;
    }
    pending_[gidx] = payload;
    SSTRow& own = own_row_mut();
    own.received_num[static_cast<size_t>(sender_rank)] = k + 1;
    // Largest g such that every round-robin index <= g has been received.
    long long first_missing = own.received_num[0] * n + 0;
    for (int r = 1; r < n; ++r)
        first_missing = std::min(first_missing, own.received_num[static_cast<size_t>(r)] * n + r);
    own.global_index = first_missing - 1;
}

bool Node::stability_delivery() {
    if (wedged_) return false;
    SSTRow& own = own_row_mut();
    auto stable = reduce_min(
        sst_, [](const SSTRow& r) { return r.global_index; },
        [&own](size_t rank, const SSTRow&) { return !own.suspected[rank]; });
    if (!stable) return false;
    bool did = false;
    while (next_deliver_ <= *stable) {
        auto it = pending_.find(next_deliver_);
        if (it == pending_.end()) {
            svc_.report_violation("stability_delivery: missing message at stable index " +
                                  std::to_string(next_deliver_));
            return did;
        }
        if (it->second) deliver_upcall(next_deliver_, *it->second);
        pending_.erase(it);
        next_deliver_++;
        did = true;
    }
    // Our k-th multicast is complete once stable covers its round-robin slot.
    int n = view_.num_members();
    long long done = *stable >= view_.my_rank ? (*stable - view_.my_rank) / n + 1 : 0;
    if (done > completed_num_) {
        if (done > sent_num_) {
            svc_.report_violation("completed_num would exceed sent_num");
            done = sent_num_;
        }
        completed_num_ = done;
        did = true;
    }
    return did;
}

void Node::deliver_upcall(long long gidx, const Request& req) {
    emit_event(EventKind::Deliver, gidx, &req);
    if (!responded_.count(key_of(req))) execute(gidx, req);
}

void Node::execute(long long gidx, const Request& req) {
    emit_event(EventKind::Execute, gidx, &req);
    responded_.insert(key_of(req));
    svc_.respond(id_, req.client_id, req.request_id);
}

bool Node::send_null_if_stalled() {
    if (wedged_ || !parked_.empty()) return false;
    const SSTRow& own = own_row();
    long long max_seen = 0;
    for (long long c : own.received_num) max_seen = std::max(max_seen, c);
    if (sent_num_ >= max_seen) return false;
    if (!get_buffer()) return false;
    send_req(std::nullopt);
    return true;
}

void Node::wedge() {
    if (!wedged_) {
        wedged_ = true;
        own_row_mut().wedged = true;
    }
}

void Node::suspect(int rank) {
    if (rank == view_.my_rank) return;
    SSTRow& own = own_row_mut();
    if (!own.suspected[static_cast<size_t>(rank)]) {
        own.suspected[static_cast<size_t>(rank)] = true;
        wedge();
    }
}

bool Node::leader_selection() {
    const SSTRow& own = own_row();
    int nl = find_new_leader(own);
    if (nl < 0) {
        svc_.report_violation("leader_selection: all members suspected");
        halted_ = true;
        return true;
    }
    if (nl == current_leader_) return false;
    if (nl == view_.my_rank) {
        bool agree = true;
        if (cfg_.leader_mode == LeaderMode::Fixed) {
            // Recomputed from scratch every evaluation round.
            for (int r = 0; r < view_.num_members(); ++r) {
                if (r == view_.my_rank || own.suspected[static_cast<size_t>(r)]) continue;
                if (find_new_leader(sst_[static_cast<size_t>(r)]) != view_.my_rank) agree = false;
            }
        } else {
            // Known-bad variant: flag initialized once, cleared forever after
            // the first disagreement.
            if (!buggy_agree_entered_) {
                buggy_agree_entered_ = true;
                buggy_all_agree_ = true;
            }
            for (int r = 0; r < view_.num_members(); ++r) {
                if (r == view_.my_rank || own.suspected[static_cast<size_t>(r)]) continue;
                if (find_new_leader(sst_[static_cast<size_t>(r)]) != view_.my_rank)
                    buggy_all_agree_ = false;
            }
            agree = buggy_all_agree_;
        }
        if (agree) {
            current_leader_ = view_.my_rank;
            is_agreed_leader_ = true;
            return true;
        }
        return false;
    }
    if (cfg_.leader_mode == LeaderMode::Fixed) {
        current_leader_ = nl;
        is_agreed_leader_ = false;
        return true;
    }
    return false;  // known-bad variant: non-leaders never update
}

bool Node::membership_step() {
    if (halted_) return false;
    bool did = false;
    SSTRow& own = own_row_mut();
    int n = view_.num_members();

    // Timeout-based failure detector, only while traffic is owed to us.
    if (cfg_.detect_timeout > 0 && (!pending_.empty() || !parked_.empty())) {
        for (int r = 0; r < n; ++r) {
            if (r == view_.my_rank || own.suspected[static_cast<size_t>(r)]) continue;
            if (svc_.now() - last_row_step_[static_cast<size_t>(r)] > cfg_.detect_timeout) {
                suspect(r);
                did = true;
            }
        }
    }

    // Suspicion contagion via the logical-or reducer.
    for (int r = 0; r < n; ++r) {
        if (r == view_.my_rank || own.suspected[static_cast<size_t>(r)]) continue;
        bool anyone = reduce_logical_or(
            sst_, [r](const SSTRow& row) { return row.suspected[static_cast<size_t>(r)]; });
        if (anyone) {
            suspect(r);
            did = true;
        }
    }

    did |= leader_selection();
    if (halted_) return true;

    // Leader: propose leaves for newly suspected members.
    if (is_agreed_leader_ && current_leader_ == view_.my_rank) {
        for (int r = 0; r < n; ++r) {
            if (!own.suspected[static_cast<size_t>(r)]) continue;
            NodeId nid = view_.members[static_cast<size_t>(r)];
            bool already = std::any_of(own.changes.begin(), own.changes.end(),
                                       [nid](const MembershipChange& c) {
                                           return c.node == nid && c.kind == ChangeKind::Leave;
                                       });
            if (!already) {
                own.changes.push_back({nid, ChangeKind::Leave});
                own.num_changes = static_cast<int>(own.changes.size());
                own.num_acked = own.num_changes;  // leader acks its own proposal
                wedge();
                did = true;
            }
        }
        // Commit once every non-suspected member acked, announcing the
        // ragged-edge trim in global_index alongside num_committed.
        if (own.num_changes > 0 && own.num_committed < own.num_changes) {
            bool all_acked = true;
            for (int r = 0; r < n; ++r) {
                if (own.suspected[static_cast<size_t>(r)]) continue;
                if (sst_[static_cast<size_t>(r)].num_acked < own.num_changes) all_acked = false;
            }
            if (all_acked) {
                auto trim = reduce_min(
                    sst_, [](const SSTRow& r) { return r.global_index; },
                    [&own](size_t rank, const SSTRow&) { return !own.suspected[rank]; });
                own.global_index = trim.value_or(-1);
                own.num_committed = own.num_changes;
                did = true;
            }
        }
    } else if (current_leader_ != view_.my_rank) {
        // Follower: ack the leader's proposed prefix.
        const SSTRow& lr = sst_[static_cast<size_t>(current_leader_)];
        if (lr.num_changes > own.num_acked) {
            size_t common = std::min(own.changes.size(), lr.changes.size());
            for (size_t i = 0; i < common; ++i) {
                if (!(own.changes[i] == lr.changes[i])) {
                    svc_.report_violation("ack_changes: conflicting change ledgers");
                    return true;
                }
            }
            own.changes.assign(lr.changes.begin(),
                               lr.changes.begin() + lr.num_changes);
            own.num_changes = lr.num_changes;
            own.num_acked = lr.num_changes;
            wedge();
            did = true;
        }
    }

    // Install once the leader committed everything we acked.
    bool install = false;
    long long trim = -1;
    if (own.num_acked > 0) {
        const SSTRow& lr = current_leader_ == view_.my_rank
                               ? own
                               : sst_[static_cast<size_t>(current_leader_)];
        if (lr.num_committed == lr.num_changes && lr.num_changes == own.num_acked) {
            own.num_committed = own.num_acked;
            own.num_installed = own.num_committed;
            trim = lr.global_index;
            install = true;
            did = true;
        }
    }

    if (did) publish();
    if (install) do_trim_and_install(trim);
    return did;
}

void Node::do_trim_and_install(long long trim) {
    // Deliver the agreed prefix of the ending view.
    while (next_deliver_ <= trim) {
        auto it = pending_.find(next_deliver_);
        if (it == pending_.end()) {
            svc_.report_violation("trim: missing message at index " +
                                  std::to_string(next_deliver_));
            break;
        }
        if (it->second) deliver_upcall(next_deliver_, *it->second);
        pending_.erase(it);
        next_deliver_++;
    }
    // Re-park our own multicasts past the trim; they re-enter in the new view.
    int n = view_.num_members();
    std::vector<Request> reparked;
    for (size_t k = 0; k < own_sends_.size(); ++k) {
        long long gidx = round_robin_index(view_.my_rank, static_cast<long long>(k), n);
        if (gidx > trim && own_sends_[k]) reparked.push_back(*own_sends_[k]);
    }
    parked_.insert(parked_.begin(), reparked.begin(), reparked.end());

    // Apply the committed ledger, in order.
    const SSTRow& own = own_row();
    std::vector<NodeId> members = view_.members;
    for (int i = 0; i < own.num_committed; ++i) {
        const MembershipChange& c = own.changes[static_cast<size_t>(i)];
        if (c.kind == ChangeKind::Leave)
            members.erase(std::remove(members.begin(), members.end(), c.node), members.end());
        else if (std::find(members.begin(), members.end(), c.node) == members.end())
            members.push_back(c.node);
    }

    View next(view_.vid + 1, std::move(members), id_);
    if (next.my_rank < 0) {
        halted_ = true;  // removed from the group
        return;
    }
    view_ = next;
    emit_event(EventKind::ViewInstalled, -1, nullptr);
    svc_.record_install(id_, view_);

    int nn = view_.num_members();
    sst_.assign(static_cast<size_t>(nn), SSTRow::fresh(cfg_.window_size, nn));
    last_row_step_.assign(static_cast<size_t>(nn), svc_.now());
    sent_num_ = 0;
    completed_num_ = 0;
    pending_.clear();
    next_deliver_ = 0;
    own_sends_.clear();
    wedged_ = false;
    current_leader_ = view_.leader_rank;
    is_agreed_leader_ = (view_.my_rank == view_.leader_rank);
    buggy_agree_entered_ = false;
    buggy_all_agree_ = true;

    // Replay row updates that arrived for this view before we installed it.
    for (auto it = future_rows_.begin(); it != future_rows_.end();) {
        if (it->first.first < view_.vid) {
            it = future_rows_.erase(it);
        } else if (it->first.first == view_.vid) {
            int rank = view_.rank_of(it->first.second);
            if (rank >= 0) sst_[static_cast<size_t>(rank)] = it->second;
            it = future_rows_.erase(it);
        } else {
            ++it;
        }
    }
}

bool Node::take_turn() {
    if (halted_) return false;
    switch (rng_() % 5) {
        case 0: return retry_parked();
        case 1: return receive_req();
        case 2: return stability_delivery();
        case 3: return send_null_if_stalled();
        default: return membership_step();
    }
}

bool Node::sweep() {
    if (halted_) return false;
    bool did = false;
    did |= retry_parked();
    did |= receive_req();
    did |= stability_delivery();
    did |= send_null_if_stalled();
    did |= membership_step();
    return did;
}

}  // namespace derecho
