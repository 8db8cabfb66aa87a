#include "derecho/events.hpp"

#include <sstream>

namespace derecho {

const char* kind_name(EventKind k) {
    switch (k) {
        case EventKind::RequestReceived: return "request";
        case EventKind::Deliver: return "deliver";
        case EventKind::Execute: return "execute";
        case EventKind::ViewInstalled: return "view";
    }
    return "?";
}

std::string describe(const ProtocolEvent& e) {
    std::ostringstream os;
    os << kind_name(e.kind) << " node=" << e.node << " vid=" << e.vid;
    if (e.kind != EventKind::ViewInstalled)
        os << " gidx=" << e.gidx << " req=(" << e.client_id << "," << e.request_id << ")";
    os << " t=" << e.t << " step=" << e.step;
    return os.str();
}

}  // namespace derecho
