#include "derecho/checker.hpp"

#include <algorithm>
#include <sstream>

namespace derecho {

namespace {
const std::vector<std::string> kProperties = {
    "delivery_ordering", "validity",        "agreement",
    "uniform_integrity", "progress_counts", "virtual_synchrony",
};

std::string req_str(const ProtocolEvent& e) {
    std::ostringstream os;
    os << "(" << e.client_id << "," << e.request_id << ")";
    return os.str();
}
}  // namespace

const std::vector<std::string>& Checker::property_names() { return kProperties; }

void Checker::fail(const std::string& property, std::vector<ProtocolEvent> ce,
                   std::string detail) {
    if (failures_.count(property)) return;  // keep the first violation in trace order
    Verdict v;
    v.property = property;
    v.outcome = Outcome::Fail;
    v.counterexample = std::move(ce);
    v.detail = std::move(detail);
    failures_[property] = std::move(v);
}

void Checker::feed(const ProtocolEvent& e) {
    switch (e.kind) {
        case EventKind::RequestReceived:
            received_.insert(e.request_key());
            first_received_.emplace(e.request_key(), e);
            break;
        case EventKind::Deliver:
            check_delivery_ordering(e);
            delivered_sets_[{e.node, e.vid}].emplace(
                std::make_pair(e.gidx, e.request_key()), e);
            break;
        case EventKind::Execute:
            check_validity(e);
            check_agreement(e);
            check_uniform_integrity(e);
            executed_per_node_[e.node].insert(e.request_key());
            break;
        case EventKind::ViewInstalled:
            installers_[e.vid].insert(e.node);
            break;
    }
}

void Checker::check_delivery_ordering(const ProtocolEvent& e) {
    auto& by_gidx = delivers_[{e.node, e.vid}];
    auto [it, inserted] = by_gidx.emplace(e.gidx, e);
    if (!inserted) return;  // equal indexes never violate the ordering query
    if (it != by_gidx.begin()) {
        auto prev = std::prev(it);
        if (prev->second.t >= e.t)
            fail("delivery_ordering", {prev->second, e},
                 "node " + std::to_string(e.node) + " delivered gidx " +
                     std::to_string(e.gidx) + " no later than gidx " +
                     std::to_string(prev->first));
    }
    auto next = std::next(it);
    if (next != by_gidx.end() && next->second.t <= e.t)
        fail("delivery_ordering", {e, next->second},
             "node " + std::to_string(e.node) + " delivered gidx " +
                 std::to_string(next->first) + " no later than gidx " +
                 std::to_string(e.gidx));
}

void Checker::check_validity(const ProtocolEvent& e) {
    if (!received_.count(e.request_key()))
        fail("validity", {e}, "executed request " + req_str(e) + " was never received");
}

void Checker::check_agreement(const ProtocolEvent& e) {
    auto [it, inserted] = executes_by_index_.emplace(std::make_pair(e.vid, e.gidx), e);
    if (inserted) return;
    const ProtocolEvent& first = it->second;
    if (first.request_key() != e.request_key() || first.digest != e.digest)
        fail("agreement", {first, e},
             "divergent requests executed at vid " + std::to_string(e.vid) + " gidx " +
                 std::to_string(e.gidx));
}

void Checker::check_uniform_integrity(const ProtocolEvent& e) {
    auto [it, inserted] =
        executes_by_request_.emplace(std::make_pair(e.node, e.request_key()), e);
    if (inserted) return;
    const ProtocolEvent& first = it->second;
    if (std::make_pair(first.vid, first.gidx) != std::make_pair(e.vid, e.gidx))
        fail("uniform_integrity", {first, e},
             "node " + std::to_string(e.node) + " executed request " + req_str(e) +
                 " at two different indexes");
}

Verdict Checker::progress_verdict(bool quiescent) const {
    Verdict v;
    v.property = "progress_counts";
    if (auto it = failures_.find(v.property); it != failures_.end()) return it->second;
    if (!quiescent) {
        v.outcome = Outcome::Indeterminate;
        v.detail = "evaluated mid-run";
        return v;
    }
    // Compare against the nodes that installed the final view; nodes that left
    // the group earlier are not obligated to execute everything.
    int max_vid = 0;
    for (const auto& [vid, nodes] : installers_) max_vid = std::max(max_vid, vid);
    auto inst = installers_.find(max_vid);
    if (inst == installers_.end()) {
        v.outcome = received_.empty() ? Outcome::Pass : Outcome::Fail;
        v.detail = "no views installed";
        return v;
    }
    for (int node : inst->second) {
        std::set<RequestKey> done;
        if (auto it = executed_per_node_.find(node); it != executed_per_node_.end())
            done = it->second;
        std::string missing;
        for (const RequestKey& k : received_) {
            if (done.count(k)) continue;
            missing += " (" + std::to_string(k.first) + "," + std::to_string(k.second) + ")";
            if (auto it = first_received_.find(k); it != first_received_.end())
                v.counterexample.push_back(it->second);
        }
        if (missing.empty()) continue;
        v.outcome = Outcome::Fail;
        v.detail = "node " + std::to_string(node) + ": executed " +
                   std::to_string(done.size()) + " of " + std::to_string(received_.size()) +
                   " distinct requests; missing" + missing;
        return v;
    }
    return v;
}

Verdict Checker::virtual_synchrony_verdict() const {
    Verdict v;
    v.property = "virtual_synchrony";
    // For each view whose successor was installed, all installers of the
    // successor must have delivered identical (gidx, request) sets in it.
    for (const auto& [vid, nodes] : installers_) {
        if (vid == 0 || nodes.size() < 2) continue;
        int prev_vid = vid - 1;
        const std::map<std::pair<long long, RequestKey>, ProtocolEvent>* ref = nullptr;
        int ref_node = -1;
        for (int node : nodes) {
            static const std::map<std::pair<long long, RequestKey>, ProtocolEvent> kEmpty;
            auto it = delivered_sets_.find({node, prev_vid});
            const auto& mine = it == delivered_sets_.end() ? kEmpty : it->second;
            if (!ref) {
                ref = &mine;
                ref_node = node;
                continue;
            }
            if (mine.size() == ref->size() &&
                std::equal(mine.begin(), mine.end(), ref->begin(),
                           [](const auto& a, const auto& b) { return a.first == b.first; }))
                continue;
            v.outcome = Outcome::Fail;
            for (const auto& [key, ev] : mine)
                if (!ref->count(key)) v.counterexample.push_back(ev);
            for (const auto& [key, ev] : *ref)
                if (!mine.count(key)) v.counterexample.push_back(ev);
            v.detail = "nodes " + std::to_string(ref_node) + " and " + std::to_string(node) +
                       " delivered different sets in vid " + std::to_string(prev_vid);
            return v;
        }
    }
    return v;
}

std::vector<Verdict> Checker::verdicts(bool quiescent) const {
    std::vector<Verdict> out;
    for (const std::string& name : kProperties) {
        if (name == "progress_counts") {
            out.push_back(progress_verdict(quiescent));
            continue;
        }
        if (name == "virtual_synchrony") {
            if (auto it = failures_.find(name); it != failures_.end())
                out.push_back(it->second);
            else
                out.push_back(virtual_synchrony_verdict());
            continue;
        }
        if (auto it = failures_.find(name); it != failures_.end()) {
            out.push_back(it->second);
        } else {
            Verdict v;
            v.property = name;
            out.push_back(std::move(v));
        }
    }
    return out;
}

}  // namespace derecho
