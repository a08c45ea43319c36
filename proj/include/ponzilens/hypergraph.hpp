#pragma once

#include "ponzilens/model.hpp"

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace ponzilens {

struct NodeId
{
    std::uint32_t value = 0;
    auto operator<=>(const NodeId&) const = default;
};

struct GraphId
{
    std::uint32_t value = 0;
    auto operator<=>(const GraphId&) const = default;
};

/// An edge endpoint: a basic node or a hypernode.
using Endpoint = std::variant<NodeId, GraphId>;
using Edge = std::pair<Endpoint, Endpoint>;

enum class NodeKind { StateVar, Local, Param, Builtin, Sink };
enum class GraphKind { Root, Contract, Function };

struct BasicNode
{
    std::vector<std::string> path;
    NodeKind kind = NodeKind::Local;
    GraphId parent;
    std::optional<Span> span;
};

struct Hypernode
{
    std::vector<std::string> path;  // empty for the root
    GraphKind kind = GraphKind::Root;
    std::optional<GraphId> parent;
    std::vector<NodeId> nodes;
    std::vector<GraphId> children;
    std::set<Edge> edges;
    std::optional<Span> span;
};

/// The (id, members, edges) triple of one graph.
struct GraphView
{
    GraphId id;
    std::vector<Endpoint> members;
    std::vector<Edge> edges;
};

struct BuildDiagnostic
{
    std::string function;  // qualified id of the caller
    std::string callee;    // callee as written
    std::string message;
};

struct BuildOptions
{
    /// Add edges from guard uses into the defs of guarded statements.
    bool implicit_flow = false;
};

/// Nested graph of contracts, functions and variables. Every edge is stored in
/// the innermost graph containing both endpoints.
class HypernodeGraph
{
public:
    HypernodeGraph();

    [[nodiscard]] GraphId root() const { return GraphId{0}; }

    GraphId add_graph(GraphId parent, std::string name, GraphKind kind, std::optional<Span> span = std::nullopt);
    NodeId add_node(GraphId parent, std::string name, NodeKind kind, std::optional<Span> span = std::nullopt);
    /// Adds a flow edge to the innermost graph containing both endpoints.
    /// Graph-to-graph edges and edges touching the root are rejected with
    /// InvalidArgument.
    void add_edge(Endpoint from, Endpoint to);

    [[nodiscard]] GraphView graph_of(GraphId id) const;
    [[nodiscard]] const Hypernode& graph(GraphId id) const;
    [[nodiscard]] const BasicNode& node(NodeId id) const;
    [[nodiscard]] bool contains(Endpoint e) const;

    [[nodiscard]] std::optional<NodeId> find_node(const std::vector<std::string>& path) const;
    [[nodiscard]] std::optional<GraphId> find_graph(const std::vector<std::string>& path) const;

    [[nodiscard]] std::size_t node_count() const { return nodes_.size(); }
    [[nodiscard]] std::size_t graph_count() const { return graphs_.size(); }
    [[nodiscard]] std::size_t edge_count() const;
    [[nodiscard]] std::vector<Edge> all_edges() const;
    /// The graph an endpoint is a member of (the root has none).
    [[nodiscard]] std::optional<GraphId> location(Endpoint e) const;
    [[nodiscard]] bool is_ancestor(GraphId ancestor, GraphId g) const;

    [[nodiscard]] const std::vector<std::string>& path(Endpoint e) const;
    /// Dotted path, e.g. `Doubler.enter.amount`.
    [[nodiscard]] std::string path_string(Endpoint e) const;

    void set_sources(std::shared_ptr<const std::vector<SourceFile>> files) { files_ = std::move(files); }
    /// Exact source text behind an endpoint's span; NoSpan for synthetic nodes.
    [[nodiscard]] std::string source_slice(Endpoint e) const;

    [[nodiscard]] const std::vector<BuildDiagnostic>& diagnostics() const { return diagnostics_; }
    void add_diagnostic(BuildDiagnostic d) { diagnostics_.push_back(std::move(d)); }

private:
    std::vector<Hypernode> graphs_;
    std::vector<BasicNode> nodes_;
    std::map<std::vector<std::string>, NodeId> node_index_;
    std::map<std::vector<std::string>, GraphId> graph_index_;
    std::shared_ptr<const std::vector<SourceFile>> files_;
    std::vector<BuildDiagnostic> diagnostics_;
};

inline constexpr std::string_view kExternalSink = "@external";

/// Builds the hypernode graph for every contract in `models`. When `unit` is
/// given its source files back `source_slice`.
HypernodeGraph build(const std::vector<ContractModel>& models, const SourceUnit* unit = nullptr,
                     const BuildOptions& options = {});

/// Node id for a variable as referenced from `contract.function`.
std::vector<std::string> var_path(const std::string& contract, const std::string& function, const VarRef& var);

std::string_view to_string(NodeKind kind);

/// `--dump-graph` form: nested members, edges and spans.
nlohmann::json to_json(const HypernodeGraph& graph);

}  // namespace ponzilens
