#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <vector>

#include "derecho/types.hpp"

namespace derecho {

// One ring-buffer cell. seq_num is the sender's cumulative message count at
// the time of writing; a receiver expecting its k-th message from a sender
// sees the cell at position k % window_size as fresh exactly when
// seq_num == k. Initial -1 never matches.
struct Slot {
    std::optional<Request> payload;  // nullopt = null (stall-prevention) message
    long long seq_num = -1;

    friend bool operator==(const Slot&, const Slot&) = default;
};

// One node's published protocol-control state. A node only ever writes its
// own row; copies of remote rows change only via row-replication messages.
struct SSTRow {
    std::vector<Slot> slots;                  // length = window_size
    long long global_index = -1;              // highest safely-deliverable round-robin index
    std::vector<long long> received_num;      // per member rank
    std::vector<bool> suspected;              // per member rank
    bool wedged = false;
    std::vector<MembershipChange> changes;    // membership-change ledger
    int num_changes = 0;
    int num_acked = 0;
    int num_committed = 0;
    int num_installed = 0;
    long long write_count = 0;                // monotone per view, single-writer check

    static SSTRow fresh(int window_size, int num_members) {
        SSTRow r;
        r.slots.assign(static_cast<size_t>(window_size), Slot{});
        r.received_num.assign(static_cast<size_t>(num_members), 0);
        r.suspected.assign(static_cast<size_t>(num_members), false);
        return r;
    }

    friend bool operator==(const SSTRow&, const SSTRow&) = default;
};

// Epoch metadata. `self` is the id of the node holding this View; my_rank is
// its index in members, or -1 after removal.
struct View {
    int vid = 0;
    std::vector<NodeId> members;
    NodeId self = -1;
    int my_rank = -1;
    int leader_rank = 0;

    View() = default;
    View(int vid_, std::vector<NodeId> members_, NodeId self_)
        : vid(vid_), members(std::move(members_)), self(self_) {
        recompute_rank();
    }

    int num_members() const { return static_cast<int>(members.size()); }

    int rank_of(NodeId n) const {
        auto it = std::find(members.begin(), members.end(), n);
        return it == members.end() ? -1 : static_cast<int>(it - members.begin());
    }

    View with_member_added(NodeId n) const {
        if (rank_of(n) >= 0)
            throw std::logic_error("with_member_added: node already a member");
        View v = *this;
        v.vid = vid + 1;
        v.members.push_back(n);
        v.recompute_rank();
        return v;
    }

    View with_member_removed(NodeId n) const {
        int r = rank_of(n);
        if (r < 0)
            throw std::logic_error("with_member_removed: node not a member");
        View v = *this;
        v.vid = vid + 1;
        v.members.erase(v.members.begin() + r);
        v.recompute_rank();
        return v;
    }

    void recompute_rank() { my_rank = rank_of(self); }

    friend bool operator==(const View&, const View&) = default;
};

// Column reducers over a set of SST rows. `field` selects the column,
// `mask` restricts which rows participate.

template <class Rows, class Field>
bool reduce_logical_or(const Rows& rows, Field field) {
    if (rows.empty())
        throw std::logic_error("reduce_logical_or: empty row set");
    for (const auto& r : rows)
        if (field(r)) return true;
    return false;
}

template <class Rows, class Field, class Mask>
std::optional<long long> reduce_min(const Rows& rows, Field field, Mask mask) {
    std::optional<long long> m;
    size_t rank = 0;
    for (const auto& r : rows) {
        if (mask(rank, r)) {
            long long v = field(r);
            if (!m || v < *m) m = v;
        }
        ++rank;
    }
    return m;  // nullopt when no row satisfies mask: caller cannot advance
}

}  // namespace derecho
