#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "derecho/events.hpp"

namespace derecho {

struct TraceParseError : std::runtime_error {
    TraceParseError(size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_no(line) {}
    size_t line_no;
};

// One self-describing record per line, in global scheduler-step order.
std::string format_record(const ProtocolEvent& e);
ProtocolEvent parse_record(const std::string& line, size_t line_no);

void write_trace(std::ostream& os, const std::vector<ProtocolEvent>& events);
std::vector<ProtocolEvent> read_trace(std::istream& is);

void write_trace_file(const std::string& path, const std::vector<ProtocolEvent>& events);
std::vector<ProtocolEvent> read_trace_file(const std::string& path);

}  // namespace derecho
