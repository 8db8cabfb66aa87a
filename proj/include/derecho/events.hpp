#pragma once

#include <cstdint>
#include <string>

#include "derecho/types.hpp"

namespace derecho {

enum class EventKind {
    RequestReceived,
    Deliver,
    Execute,
    ViewInstalled,
};

const char* kind_name(EventKind k);

// One checker-visible event. t is a node-local monotonic counter; step is the
// global scheduler step at which the event was emitted.
struct ProtocolEvent {
    EventKind kind = EventKind::RequestReceived;
    int node = -1;
    int vid = 0;
    long long gidx = -1;
    int client_id = -1;
    int request_id = -1;
    uint64_t digest = 0;
    long long t = -1;
    long long step = -1;

    RequestKey request_key() const { return {client_id, request_id}; }

    friend bool operator==(const ProtocolEvent&, const ProtocolEvent&) = default;
};

std::string describe(const ProtocolEvent& e);

}  // namespace derecho
