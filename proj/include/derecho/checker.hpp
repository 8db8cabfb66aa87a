#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "derecho/events.hpp"

namespace derecho {

enum class Outcome { Pass, Fail, Indeterminate };

struct Verdict {
    std::string property;
    Outcome outcome = Outcome::Pass;
    std::vector<ProtocolEvent> counterexample;  // nonempty iff Fail
    std::string detail;

    bool passed() const { return outcome == Outcome::Pass; }
};

// Incremental checker over the protocol event stream. Feeding the full trace
// of a finished run and feeding it live produce identical verdicts; the
// checker never touches protocol state.
class Checker {
public:
    void feed(const ProtocolEvent& e);

    // All six property verdicts. Progress counts are only meaningful once the
    // run has quiesced; mid-run they come back Indeterminate.
    std::vector<Verdict> verdicts(bool quiescent) const;

    static const std::vector<std::string>& property_names();

private:
    void check_delivery_ordering(const ProtocolEvent& e);
    void check_validity(const ProtocolEvent& e);
    void check_agreement(const ProtocolEvent& e);
    void check_uniform_integrity(const ProtocolEvent& e);

    Verdict progress_verdict(bool quiescent) const;
    Verdict virtual_synchrony_verdict() const;

    void fail(const std::string& property, std::vector<ProtocolEvent> ce, std::string detail);

    std::map<std::string, Verdict> failures_;

    // delivery ordering: per (node, vid), gidx -> deliver event (t order must
    // match gidx order).
    std::map<std::pair<int, int>, std::map<long long, ProtocolEvent>> delivers_;
    // validity: every executed request must have been received somewhere.
    std::set<RequestKey> received_;
    std::map<RequestKey, ProtocolEvent> first_received_;
    // agreement: first execute per (vid, gidx).
    std::map<std::pair<int, long long>, ProtocolEvent> executes_by_index_;
    // uniform integrity: first execute per (node, request).
    std::map<std::pair<int, RequestKey>, ProtocolEvent> executes_by_request_;
    // progress: distinct requests executed per node.
    std::map<int, std::set<RequestKey>> executed_per_node_;
    // virtual synchrony: delivered (gidx, request) per (node, vid), plus the
    // events themselves for counterexamples, and who installed which view.
    std::map<std::pair<int, int>, std::map<std::pair<long long, RequestKey>, ProtocolEvent>>
        delivered_sets_;
    std::map<int, std::set<int>> installers_;  // vid -> nodes
};

}  // namespace derecho
