#include "ponzilens/taint.hpp"

#include <vector>

namespace ponzilens {

std::set<NodeId> default_sources(const HypernodeGraph& h)
{
    std::set<NodeId> out;
    for (std::uint32_t i = 0; i < h.node_count(); ++i) {
        const BasicNode& n = h.node(NodeId{i});
        if (n.kind == NodeKind::Builtin && (n.path.back() == kMsgSender || n.path.back() == kMsgValue))
            out.insert(NodeId{i});
    }
    return out;
}

TaintSubgraph tpa(const HypernodeGraph& h, const std::set<NodeId>& sources)
{
    TaintSubgraph t;
    t.id = h.root();
    for (NodeId s : sources)
        if (h.contains(s))
            t.tainted.insert(s);

    const std::size_t bound = h.node_count() + h.graph_count() + h.edge_count() + 1;
    while (t.iterations < bound) {
        ++t.iterations;
        const std::size_t tainted_before = t.tainted.size();
        const std::size_t edges_before = t.taint_edges.size();

        // One pass over the hierarchy; `done` is this pass's coverage set.
        std::set<GraphId> done;
        std::vector<GraphId> stack = {h.root()};
        while (!stack.empty()) {
            GraphId g = stack.back();
            stack.pop_back();
            if (!done.insert(g).second)
                continue;
            const Hypernode& node = h.graph(g);
            for (const auto& edge : node.edges) {
                if (!t.tainted.contains(edge.first))
                    continue;
                t.taint_edges.insert(edge);
                t.tainted.insert(edge.second);
                if (const auto* child = std::get_if<GraphId>(&edge.second); child && !done.contains(*child))
                    stack.push_back(*child);
            }
            for (auto it = node.children.rbegin(); it != node.children.rend(); ++it)
                if (!done.contains(*it))
                    stack.push_back(*it);
        }
        t.coverage.insert(done.begin(), done.end());

        if (t.tainted.size() == tainted_before && t.taint_edges.size() == edges_before)
            break;
    }
    return t;
}

std::set<NodeId> tainted_state_vars(const TaintSubgraph& t, const HypernodeGraph& h)
{
    std::set<NodeId> out;
    for (const auto& e : t.tainted)
        if (const auto* n = std::get_if<NodeId>(&e); n && h.node(*n).kind == NodeKind::StateVar)
            out.insert(*n);
    return out;
}

}  // namespace ponzilens
