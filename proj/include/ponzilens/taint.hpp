#pragma once

#include "ponzilens/hypergraph.hpp"

#include <set>

namespace ponzilens {

struct TaintSubgraph
{
    GraphId id;                     // graph the propagation started from
    std::set<Endpoint> tainted;     // basic nodes and entered hypernodes
    std::set<Edge> taint_edges;
    std::set<GraphId> coverage;     // hypernodes whose edges were scanned
    std::size_t iterations = 0;     // outer passes until the fixed point
};

/// Builtin `msg.sender` / `msg.value` nodes of every function.
std::set<NodeId> default_sources(const HypernodeGraph& h);

/// Propagates taint over `h` until neither the tainted set nor the edge set
/// changes. Sources not present in `h` are ignored.
TaintSubgraph tpa(const HypernodeGraph& h, const std::set<NodeId>& sources);

std::set<NodeId> tainted_state_vars(const TaintSubgraph& t, const HypernodeGraph& h);

}  // namespace ponzilens
