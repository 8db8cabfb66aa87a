#pragma once

#include <cstdint>
#include <string>
#include <tuple>

namespace derecho {

using NodeId = int;

// A client request, uniquely identified by (client_id, request_id).
struct Request {
    int client_id = -1;
    int request_id = -1;
    std::string payload;

    friend bool operator==(const Request&, const Request&) = default;
};

using RequestKey = std::pair<int, int>;

inline RequestKey key_of(const Request& r) {
    return {r.client_id, r.request_id};
}

enum class ChangeKind { Join, Leave };

struct MembershipChange {
    NodeId node = -1;
    ChangeKind kind = ChangeKind::Leave;

    friend bool operator==(const MembershipChange&, const MembershipChange&) = default;
};

// FNV-1a, used for payload digests in traces.
inline uint64_t payload_digest(const std::string& payload) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : payload) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace derecho
