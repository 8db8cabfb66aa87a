#pragma once

#include <variant>

#include "derecho/sst.hpp"
#include "derecho/types.hpp"

namespace derecho {

// Full-row replication message, the rdma_write_sst analog. Tagged with the
// sender's view id; receivers in an older view buffer it, receivers in a
// newer view drop it.
struct RowUpdate {
    NodeId sender = -1;
    int vid = 0;
    SSTRow row;
};

struct ClientRequest {
    Request req;
};

struct ClientResponse {
    int client_id = -1;
    int request_id = -1;
};

struct CrashNotice {
    NodeId failed = -1;
};

using Message = std::variant<RowUpdate, ClientRequest, ClientResponse, CrashNotice>;

}  // namespace derecho
