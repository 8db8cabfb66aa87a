#include "derecho/trace.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace derecho {

namespace {

EventKind kind_from(const std::string& s, size_t line_no) {
    if (s == "request") return EventKind::RequestReceived;
    if (s == "deliver") return EventKind::Deliver;
    if (s == "execute") return EventKind::Execute;
    if (s == "view") return EventKind::ViewInstalled;
    throw TraceParseError(line_no, "unknown kind '" + s + "'");
}

// Fixed field order keeps traces byte-comparable across runs.
constexpr const char* kFields[] = {"step", "node", "kind",   "vid", "gidx",
                                   "client", "req", "digest", "t"};

}  // namespace

std::string format_record(const ProtocolEvent& e) {
    std::ostringstream os;
    os << "step=" << e.step << " node=" << e.node << " kind=" << kind_name(e.kind)
       << " vid=" << e.vid << " gidx=" << e.gidx << " client=" << e.client_id
       << " req=" << e.request_id << " digest=" << std::hex << e.digest << std::dec
       << " t=" << e.t;
    return os.str();
}

ProtocolEvent parse_record(const std::string& line, size_t line_no) {
    std::istringstream is(line);
    ProtocolEvent e;
    std::string tok;
    size_t idx = 0;
    while (is >> tok) {
        if (idx >= std::size(kFields))
            throw TraceParseError(line_no, "trailing field '" + tok + "'");
        std::string expect = std::string(kFields[idx]) + "=";
        if (tok.rfind(expect, 0) != 0)
            throw TraceParseError(line_no, "expected field '" + std::string(kFields[idx]) +
                                               "', got '" + tok + "'");
        std::string val = tok.substr(expect.size());
        try {
            switch (idx) {
                case 0: e.step = std::stoll(val); break;
                case 1: e.node = std::stoi(val); break;
                case 2: e.kind = kind_from(val, line_no); break;
                case 3: e.vid = std::stoi(val); break;
                case 4: e.gidx = std::stoll(val); break;
                case 5: e.client_id = std::stoi(val); break;
                case 6: e.request_id = std::stoi(val); break;
                case 7: e.digest = std::stoull(val, nullptr, 16); break;
                case 8: e.t = std::stoll(val); break;
            }
        } catch (const TraceParseError&) {
            throw;
        } catch (const std::exception&) {
            throw TraceParseError(line_no, "bad value '" + val + "' for field '" +
                                               kFields[idx] + "'");
        }
        ++idx;
    }
    if (idx != std::size(kFields))
        throw TraceParseError(line_no, "truncated record (" + std::to_string(idx) + " of " +
                                           std::to_string(std::size(kFields)) + " fields)");
    return e;
}

void write_trace(std::ostream& os, const std::vector<ProtocolEvent>& events) {
    for (const auto& e : events) os << format_record(e) << '\n';
}

std::vector<ProtocolEvent> read_trace(std::istream& is) {
    std::vector<ProtocolEvent> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        out.push_back(parse_record(line, line_no));
    }
    return out;
}

void write_trace_file(const std::string& path, const std::vector<ProtocolEvent>& events) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open trace file for writing: " + path);
    write_trace(os, events);
}

std::vector<ProtocolEvent> read_trace_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open trace file: " + path);
    return read_trace(is);
}

}  // namespace derecho
