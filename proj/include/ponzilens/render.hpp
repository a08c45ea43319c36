#pragma once

#include "ponzilens/taint.hpp"

#include <string>

namespace ponzilens {

struct RenderOptions
{
    /// Group each function's variables in a `cluster_` subgraph.
    bool cluster = false;
    std::string graph_name = "taint";
};

struct DotDocument
{
    std::string text;
    std::size_t node_count = 0;
    std::size_t edge_count = 0;
};

/// Renders the tainted endpoints and edges as a DOT digraph. Node ids are
/// quoted dotted paths; output is sorted and byte-stable.
DotDocument to_dot(const TaintSubgraph& t, const HypernodeGraph& h, const RenderOptions& options = {});

/// Display label: `Contract.var` for state variables, `fn.var` for function
/// variables, `Contract.fn()` for function hypernodes.
std::string display_label(const HypernodeGraph& h, Endpoint e);

}  // namespace ponzilens
