#include "ponzilens/error.hpp"
#include "ponzilens/hypergraph.hpp"

#include <algorithm>

namespace ponzilens {

HypernodeGraph::HypernodeGraph()
{
    graphs_.push_back(Hypernode{});
    graph_index_[{}] = GraphId{0};
}

GraphId HypernodeGraph::add_graph(GraphId parent, std::string name, GraphKind kind, std::optional<Span> span)
{
    std::vector<std::string> path = graph(parent).path;
    path.push_back(std::move(name));
    if (auto existing = find_graph(path))
        return *existing;
    GraphId id{static_cast<std::uint32_t>(graphs_.size())};
    Hypernode g;
    g.path = path;
    g.kind = kind;
    g.parent = parent;
    g.span = span;
    graphs_.push_back(std::move(g));
    graphs_[parent.value].children.push_back(id);
    graph_index_[path] = id;
    return id;
}

NodeId HypernodeGraph::add_node(GraphId parent, std::string name, NodeKind kind, std::optional<Span> span)
{
    std::vector<std::string> path = graph(parent).path;
    path.push_back(std::move(name));
    if (auto existing = find_node(path))
        return *existing;
    NodeId id{static_cast<std::uint32_t>(nodes_.size())};
    nodes_.push_back({path, kind, parent, span});
    graphs_[parent.value].nodes.push_back(id);
    node_index_[path] = id;
    return id;
}

bool HypernodeGraph::contains(Endpoint e) const
{
    if (const auto* n = std::get_if<NodeId>(&e))
        return n->value < nodes_.size();
    return std::get<GraphId>(e).value < graphs_.size();
}

std::optional<GraphId> HypernodeGraph::location(Endpoint e) const
{
    if (const auto* n = std::get_if<NodeId>(&e))
        return node(*n).parent;
    return graph(std::get<GraphId>(e)).parent;
}

bool HypernodeGraph::is_ancestor(GraphId ancestor, GraphId g) const
{
    std::optional<GraphId> cur = g;
    while (cur) {
        if (*cur == ancestor)
            return true;
        cur = graphs_[cur->value].parent;
    }
    return false;
}

void HypernodeGraph::add_edge(Endpoint from, Endpoint to)
{
    if (!contains(from) || !contains(to))
        throw Error(ErrorCode::UnknownNode, "edge endpoint is not part of the graph");
    if (std::holds_alternative<GraphId>(from) && std::holds_alternative<GraphId>(to))
        throw Error(ErrorCode::InvalidArgument, "edges between two hypernodes are not allowed");
    auto a = location(from);
    auto b = location(to);
    if (!a || !b)
        throw Error(ErrorCode::InvalidArgument, "the root graph cannot be an edge endpoint");

    std::vector<GraphId> chain;
    for (std::optional<GraphId> cur = *a; cur; cur = graphs_[cur->value].parent)
        chain.push_back(*cur);
    GraphId home = root();
    for (std::optional<GraphId> cur = *b; cur; cur = graphs_[cur->value].parent)
        if (std::find(chain.begin(), chain.end(), *cur) != chain.end()) {
            home = *cur;
            break;
        }
    graphs_[home.value].edges.insert({from, to});
}

GraphView HypernodeGraph::graph_of(GraphId id) const
{
    const Hypernode& g = graph(id);
    GraphView view;
    view.id = id;
    for (NodeId n : g.nodes)
        view.members.emplace_back(n);
    for (GraphId c : g.children)
        view.members.emplace_back(c);
    view.edges.assign(g.edges.begin(), g.edges.end());
    return view;
}

const Hypernode& HypernodeGraph::graph(GraphId id) const
{
    if (id.value >= graphs_.size())
        throw Error(ErrorCode::UnknownGraph, "unknown graph id " + std::to_string(id.value));
    return graphs_[id.value];
}

const BasicNode& HypernodeGraph::node(NodeId id) const
{
    if (id.value >= nodes_.size())
        throw Error(ErrorCode::UnknownNode, "unknown node id " + std::to_string(id.value));
    return nodes_[id.value];
}

std::optional<NodeId> HypernodeGraph::find_node(const std::vector<std::string>& path) const
{
    auto it = node_index_.find(path);
    if (it == node_index_.end())
        return std::nullopt;
    return it->second;
}

std::optional<GraphId> HypernodeGraph::find_graph(const std::vector<std::string>& path) const
{
    auto it = graph_index_.find(path);
    if (it == graph_index_.end())
        return std::nullopt;
    return it->second;
}

std::size_t HypernodeGraph::edge_count() const
{
    std::size_t n = 0;
    for (const auto& g : graphs_)
        n += g.edges.size();
    return n;
}

std::vector<Edge> HypernodeGraph::all_edges() const
{
    std::vector<Edge> out;
    for (const auto& g : graphs_)
        out.insert(out.end(), g.edges.begin(), g.edges.end());
    return out;
}

const std::vector<std::string>& HypernodeGraph::path(Endpoint e) const
{
    if (const auto* n = std::get_if<NodeId>(&e))
        return node(*n).path;
    return graph(std::get<GraphId>(e)).path;
}

std::string HypernodeGraph::path_string(Endpoint e) const
{
    std::string out;
    for (const auto& part : path(e)) {
        if (!out.empty())
            out += '.';
        out += part;
    }
    return out;
}

std::string HypernodeGraph::source_slice(Endpoint e) const
{
    std::optional<Span> span;
    if (const auto* n = std::get_if<NodeId>(&e))
        span = node(*n).span;
    else
        span = graph(std::get<GraphId>(e)).span;
    if (!span)
        throw Error(ErrorCode::NoSpan, path_string(e) + " has no source span");
    if (!files_ || span->file < 0 || static_cast<std::size_t>(span->file) >= files_->size())
        throw Error(ErrorCode::NoSpan, path_string(e) + ": source text unavailable");
    const std::string& text = (*files_)[static_cast<std::size_t>(span->file)].text;
    if (static_cast<std::size_t>(span->offset) + span->length > text.size())
        throw Error(ErrorCode::NoSpan, path_string(e) + ": span exceeds source text");
    return text.substr(span->offset, span->length);
}

std::string_view to_string(NodeKind kind)
{
    switch (kind) {
    case NodeKind::StateVar: return "state";
    case NodeKind::Local: return "local";
    case NodeKind::Param: return "param";
    case NodeKind::Builtin: return "builtin";
    case NodeKind::Sink: return "sink";
    }
    return "unknown";
}

namespace {

nlohmann::json endpoint_json(const HypernodeGraph& h, Endpoint e)
{
    return h.path_string(e) + (std::holds_alternative<GraphId>(e) ? "()" : "");
}

nlohmann::json graph_json(const HypernodeGraph& h, GraphId id)
{
    const Hypernode& g = h.graph(id);
    nlohmann::json j;
    j["path"] = g.path;
    j["kind"] = g.kind == GraphKind::Root ? "root" : g.kind == GraphKind::Contract ? "contract" : "function";
    if (g.span)
        j["span"] = {{"offset", g.span->offset}, {"length", g.span->length}, {"file", g.span->file}};
    nlohmann::json nodes = nlohmann::json::array();
    for (NodeId n : g.nodes) {
        const BasicNode& b = h.node(n);
        nlohmann::json jn = {{"path", b.path}, {"kind", to_string(b.kind)}};
        if (b.span)
            jn["span"] = {{"offset", b.span->offset}, {"length", b.span->length}, {"file", b.span->file}};
        nodes.push_back(std::move(jn));
    }
    j["nodes"] = std::move(nodes);
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [a, b] : g.edges)
        edges.push_back({endpoint_json(h, a), endpoint_json(h, b)});
    j["edges"] = std::move(edges);
    nlohmann::json children = nlohmann::json::array();
    for (GraphId c : g.children)
        children.push_back(graph_json(h, c));
    j["children"] = std::move(children);
    return j;
}

}  // namespace

nlohmann::json to_json(const HypernodeGraph& graph)
{
    nlohmann::json j = graph_json(graph, graph.root());
    nlohmann::json diags = nlohmann::json::array();
    for (const auto& d : graph.diagnostics())
        diags.push_back({{"function", d.function}, {"callee", d.callee}, {"message", d.message}});
    j["diagnostics"] = std::move(diags);
    return j;
}

}  // namespace ponzilens
