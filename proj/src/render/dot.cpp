#include "ponzilens/render.hpp"

#include <map>

namespace ponzilens {

namespace {

std::string quote(std::string_view s)
{
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\')
            out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

std::string attributes(const HypernodeGraph& h, Endpoint e)
{
    std::string attrs = "label=" + quote(display_label(h, e));
    if (std::holds_alternative<GraphId>(e))
        return attrs + ", shape=component";
    switch (h.node(std::get<NodeId>(e)).kind) {
    case NodeKind::Builtin: return attrs + ", shape=doubleoctagon, style=filled, fillcolor=\"#f4cccc\"";
    case NodeKind::StateVar: return attrs + ", shape=box";
    case NodeKind::Sink: return attrs + ", shape=octagon, style=dashed";
    case NodeKind::Local:
    case NodeKind::Param: break;
    }
    return attrs + ", shape=ellipse";
}

}  // namespace

std::string display_label(const HypernodeGraph& h, Endpoint e)
{
    const auto& path = h.path(e);
    std::string out;
    std::size_t first = 0;
    if (std::holds_alternative<NodeId>(e) && h.node(std::get<NodeId>(e)).kind != NodeKind::StateVar)
        first = 1;
    for (std::size_t i = first; i < path.size(); ++i) {
        if (!out.empty())
            out += '.';
        out += path[i];
    }
    if (std::holds_alternative<GraphId>(e))
        out += "()";
    return out;
}

DotDocument to_dot(const TaintSubgraph& t, const HypernodeGraph& h, const RenderOptions& options)
{
    // Sorting by rendered id keeps output independent of internal numbering.
    std::map<std::string, Endpoint> nodes;
    for (const auto& e : t.tainted)
        nodes.emplace(h.path_string(e), e);
    std::set<std::pair<std::string, std::string>> edges;
    for (const auto& [a, b] : t.taint_edges) {
        edges.emplace(h.path_string(a), h.path_string(b));
        nodes.emplace(h.path_string(a), a);
        nodes.emplace(h.path_string(b), b);
    }

    DotDocument doc;
    doc.node_count = nodes.size();
    doc.edge_count = edges.size();
    std::string& out = doc.text;
    out = "digraph " + options.graph_name + " {\n";

    std::map<std::string, std::vector<std::string>> clusters;
    for (const auto& [id, e] : nodes) {
        std::string line = quote(id) + " [" + attributes(h, e) + "];\n";
        std::string cluster;
        if (options.cluster && std::holds_alternative<NodeId>(e)) {
            const BasicNode& n = h.node(std::get<NodeId>(e));
            if (h.graph(n.parent).kind == GraphKind::Function)
                cluster = h.path_string(n.parent);
        }
        if (cluster.empty())
            out += "  " + line;
        else
            clusters[cluster].push_back(std::move(line));
    }
    for (const auto& [name, lines] : clusters) {
        out += "  subgraph " + quote("cluster_" + name) + " {\n";
        out += "    label=" + quote(name + "()") + ";\n";
        for (const auto& l : lines)
            out += "    " + l;
        out += "  }\n";
    }
    for (const auto& [a, b] : edges)
        out += "  " + quote(a) + " -> " + quote(b) + ";\n";
    out += "}\n";
    return doc;
}

}  // namespace ponzilens
