#pragma once

#include "ponzilens/detect.hpp"
#include "ponzilens/eval.hpp"
#include "ponzilens/hypergraph.hpp"
#include "ponzilens/ingest.hpp"
#include "ponzilens/model.hpp"
#include "ponzilens/pipeline.hpp"
#include "ponzilens/render.hpp"
#include "ponzilens/slice.hpp"
#include "ponzilens/taint.hpp"

#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace ponzilens::testing {

std::filesystem::path fixture_dir();
std::filesystem::path fixture(const std::string& name);
std::string read_file(const std::filesystem::path& path);

/// Names of every `<name>.ast.json` fixture, sorted.
std::vector<std::string> fixture_names();

SourceUnit load_fixture(const std::string& name);

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir
{
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    [[nodiscard]] const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// Every edge of every graph, gathered by walking the containment tree.
std::set<Edge> collect_edges(const HypernodeGraph& h);

struct Reachability
{
    std::set<Endpoint> nodes;
    std::set<Edge> edges;
};

/// Breadth-first forward reachability over an explicit edge list.
Reachability bfs_reach(const std::set<Edge>& edges, const std::set<Endpoint>& sources);

/// Minimal DOT reader for the subset the renderer emits. Throws
/// std::runtime_error with a position on any syntax error.
struct ParsedDot
{
    std::string name;
    std::map<std::string, std::map<std::string, std::string>> nodes;
    std::vector<std::pair<std::string, std::string>> edges;
    std::vector<std::string> clusters;
};
ParsedDot parse_dot(const std::string& text);

/// Random nested graph: contracts, functions and nested hypernodes up to
/// `max_depth` levels below the root, at most `max_nodes` basic nodes.
struct RandomGraphPlan
{
    struct NodeDef
    {
        std::vector<std::string> path;
        std::size_t graph;  // index into graphs
        NodeKind kind;
    };
    struct GraphDef
    {
        std::vector<std::string> path;
        std::size_t parent;  // index into graphs; 0 is the root
    };
    std::vector<GraphDef> graphs;  // graphs[0] is the root
    std::vector<NodeDef> nodes;
    /// Endpoints as (is_graph, index) pairs.
    std::vector<std::pair<std::pair<bool, std::size_t>, std::pair<bool, std::size_t>>> edges;
};

RandomGraphPlan random_graph_plan(std::mt19937& rng, std::size_t max_nodes, int max_depth);
/// Materialises `plan`, inserting edges in the order given by `edge_order`.
HypernodeGraph materialise(const RandomGraphPlan& plan, const std::vector<std::size_t>& edge_order);

/// Random contract models with matching synthetic source text.
struct RandomContracts
{
    SourceUnit unit;
    std::vector<ContractModel> models;
};
RandomContracts random_contracts(std::mt19937& rng);

/// Node path for a variable as referenced inside `contract.function`,
/// computed without the library's helpers.
std::vector<std::string> expected_path(const std::string& contract, const std::string& function, const VarRef& v);

/// Functions whose variables meet the set reachable from the default
/// sources, computed from def/use tables and `bfs_reach`.
std::set<std::string> oracle_selection(const std::vector<ContractModel>& models, const HypernodeGraph& graph,
                                       bool constructors);

/// Mock-backend detection config with the shipped templates.
DetectConfig mock_config(int repeats = 5);

}  // namespace ponzilens::testing
