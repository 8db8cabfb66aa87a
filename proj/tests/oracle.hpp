#pragma once

// Independent oracles used by unit and acceptance tests. These deliberately
// avoid the implementation's own index arithmetic and delivery machinery.

#include <map>
#include <string>
#include <vector>

#include "derecho/sim.hpp"

namespace derecho::testing {

// Round-robin position of sender rank's k-th message, by explicit enumeration
// of delivery cycles rather than arithmetic.
inline long long rr_index_bruteforce(int rank, long long k, int n) {
    long long pos = 0;
    for (long long cycle = 0;; ++cycle) {
        for (int r = 0; r < n; ++r) {
            if (cycle == k && r == rank) return pos;
            ++pos;
        }
    }
}

// Expected delivered sequence for one view, enumerated directly from the
// recorded send logs: position g carries sender rank g % n's (g / n)-th send.
struct ExpectedDelivery {
    long long gidx;
    Request req;
};

inline std::vector<ExpectedDelivery> expected_deliveries(
    const std::vector<std::vector<std::optional<Request>>>& sends_per_rank) {
    std::vector<ExpectedDelivery> out;
    int n = static_cast<int>(sends_per_rank.size());
    for (long long g = 0;; ++g) {
        int rank = static_cast<int>(g % n);
        size_t k = static_cast<size_t>(g / n);
        if (k >= sends_per_rank[static_cast<size_t>(rank)].size()) break;
        const auto& payload = sends_per_rank[static_cast<size_t>(rank)][k];
        if (payload) out.push_back({g, *payload});
    }
    return out;
}

// Checks a no-failure run: every node's delivered (gidx, request) sequence in
// view 0 must equal the brute-force enumeration of the round-robin schedule,
// and the enumeration must cover every send (complete final cycle).
inline bool delivered_matches_roundrobin(const RunResult& r, std::string* why = nullptr) {
    auto complain = [&](const std::string& s) {
        if (why) *why = s;
        return false;
    };
    auto vit = r.views.find(0);
    auto sit = r.send_log.find(0);
    if (vit == r.views.end()) return complain("no initial view recorded");
    const int n = static_cast<int>(vit->second.size());
    std::vector<std::vector<std::optional<Request>>> sends(static_cast<size_t>(n));
    if (sit != r.send_log.end()) sends = sit->second;
    sends.resize(static_cast<size_t>(n));

    size_t total_sends = 0;
    for (const auto& s : sends) total_sends += s.size();
    std::vector<ExpectedDelivery> expected = expected_deliveries(sends);
    long long covered = expected.empty() && total_sends == 0
                            ? 0
                            : static_cast<long long>(total_sends);
    // The enumeration stops at the first incomplete cycle; a quiescent
    // no-failure run must have complete cycles only.
    long long enumerated = 0;
    {
        long long g = 0;
        for (;; ++g) {
            int rank = static_cast<int>(g % n);
            if (static_cast<size_t>(g / n) >= sends[static_cast<size_t>(rank)].size()) break;
        }
        enumerated = g;
    }
    if (enumerated != covered)
        return complain("incomplete final round-robin cycle: enumerated " +
                        std::to_string(enumerated) + " of " + std::to_string(covered) +
                        " sends");

    for (NodeId node : vit->second) {
        std::vector<ExpectedDelivery> actual;
        for (const auto& e : r.trace) {
            if (e.kind != EventKind::Deliver || e.node != node || e.vid != 0) continue;
            actual.push_back({e.gidx, Request{e.client_id, e.request_id, ""}});
        }
        if (actual.size() != expected.size())
            return complain("node " + std::to_string(node) + " delivered " +
                            std::to_string(actual.size()) + " messages, expected " +
                            std::to_string(expected.size()));
        for (size_t i = 0; i < expected.size(); ++i) {
            if (actual[i].gidx != expected[i].gidx ||
                actual[i].req.client_id != expected[i].req.client_id ||
                actual[i].req.request_id != expected[i].req.request_id)
                return complain("node " + std::to_string(node) + " delivery " +
                                std::to_string(i) + " diverges from round-robin order");
        }
    }
    return true;
}

}  // namespace derecho::testing
