#include "support.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ponzilens::testing {

namespace fs = std::filesystem;

fs::path fixture_dir()
{
    return PONZILENS_FIXTURE_DIR;
}

fs::path fixture(const std::string& name)
{
    return fixture_dir() / name;
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> fixture_names()
{
    std::vector<std::string> out;
    for (const auto& entry : fs::directory_iterator(fixture_dir())) {
        std::string name = entry.path().filename().string();
        const std::string ext = ".ast.json";
        if (name.size() > ext.size() && name.ends_with(ext))
            out.push_back(name.substr(0, name.size() - ext.size()));
    }
    std::sort(out.begin(), out.end());
    return out;
}

SourceUnit load_fixture(const std::string& name)
{
    return read_source_path(fixture(name + ".ast.json"), nullptr);
}

TempDir::TempDir(const std::string& tag)
{
    static std::mt19937_64 rng{std::random_device{}()};
    path_ = fs::temp_directory_path() / ("ponzilens-" + tag + "-" + std::to_string(rng()));
    fs::create_directories(path_);
}

TempDir::~TempDir()
{
    std::error_code ec;
    fs::remove_all(path_, ec);
}

std::set<Edge> collect_edges(const HypernodeGraph& h)
{
    std::set<Edge> out;
    std::vector<GraphId> todo = {h.root()};
    while (!todo.empty()) {
        GraphId g = todo.back();
        todo.pop_back();
        const Hypernode& node = h.graph(g);
        out.insert(node.edges.begin(), node.edges.end());
        todo.insert(todo.end(), node.children.begin(), node.children.end());
    }
    return out;
}

Reachability bfs_reach(const std::set<Edge>& edges, const std::set<Endpoint>& sources)
{
    std::multimap<Endpoint, Endpoint> adjacency;
    for (const auto& [a, b] : edges)
        adjacency.emplace(a, b);
    Reachability r;
    std::deque<Endpoint> queue(sources.begin(), sources.end());
    r.nodes = sources;
    while (!queue.empty()) {
        Endpoint cur = queue.front();
        queue.pop_front();
        auto [lo, hi] = adjacency.equal_range(cur);
        for (auto it = lo; it != hi; ++it) {
            r.edges.emplace(cur, it->second);
            if (r.nodes.insert(it->second).second)
                queue.push_back(it->second);
        }
    }
    return r;
}

namespace {

class DotReader
{
public:
    explicit DotReader(const std::string& text)
        : s_(text)
    {}

    ParsedDot parse()
    {
        ParsedDot out;
        expect_word("digraph");
        out.name = identifier();
        expect('{');
        body(out, true);
        skip_space();
        if (pos_ != s_.size())
            fail("trailing text");
        return out;
    }

private:
    [[noreturn]] void fail(const std::string& what) const
    {
        throw std::runtime_error("DOT syntax error at " + std::to_string(pos_) + ": " + what);
    }

    void skip_space()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
    }

    bool peek(char c)
    {
        skip_space();
        return pos_ < s_.size() && s_[pos_] == c;
    }

    void expect(char c)
    {
        if (!peek(c))
            fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    void expect_word(const std::string& w)
    {
        if (identifier() != w)
            fail("expected " + w);
    }

    std::string identifier()
    {
        skip_space();
        if (pos_ < s_.size() && s_[pos_] == '"')
            return quoted();
        std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' || s_[pos_] == '.'))
            ++pos_;
        if (start == pos_)
            fail("expected identifier");
        return s_.substr(start, pos_ - start);
    }

    std::string quoted()
    {
        ++pos_;
        std::string out;
        while (true) {
            if (pos_ >= s_.size())
                fail("unterminated string");
            char c = s_[pos_++];
            if (c == '"')
                return out;
            if (c == '\\') {
                if (pos_ >= s_.size())
                    fail("dangling escape");
                c = s_[pos_++];
            }
            out += c;
        }
    }

    std::map<std::string, std::string> attr_list()
    {
        std::map<std::string, std::string> attrs;
        expect('[');
        while (!peek(']')) {
            std::string key = identifier();
            expect('=');
            std::string value = identifier_or_color();
            if (!attrs.emplace(key, value).second)
                fail("duplicate attribute " + key);
            if (peek(','))
                ++pos_;
        }
        expect(']');
        return attrs;
    }

    std::string identifier_or_color()
    {
        skip_space();
        return identifier();
    }

    void body(ParsedDot& out, bool top)
    {
        while (!peek('}')) {
            skip_space();
            if (pos_ >= s_.size())
                fail("unexpected end");
            std::size_t save = pos_;
            std::string first = identifier();
            if (first == "subgraph" && s_[save] != '"') {
                if (!top)
                    fail("nested subgraph");
                std::string name = identifier();
                out.clusters.push_back(name);
                expect('{');
                body(out, false);
                continue;
            }
            if (peek('=')) {
                ++pos_;
                identifier();
                expect(';');
                continue;
            }
            if (peek('-')) {
                ++pos_;
                if (pos_ >= s_.size() || s_[pos_] != '>')
                    fail("expected ->");
                ++pos_;
                std::string second = identifier();
                if (peek('['))
                    attr_list();
                expect(';');
                out.edges.emplace_back(first, second);
                continue;
            }
            std::map<std::string, std::string> attrs;
            if (peek('['))
                attrs = attr_list();
            expect(';');
            if (!out.nodes.emplace(first, std::move(attrs)).second)
                fail("node declared twice: " + first);
        }
        expect('}');
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

}  // namespace

ParsedDot parse_dot(const std::string& text)
{
    return DotReader(text).parse();
}

RandomGraphPlan random_graph_plan(std::mt19937& rng, std::size_t max_nodes, int max_depth)
{
    RandomGraphPlan plan;
    plan.graphs.push_back({{}, 0});
    std::vector<int> depth = {0};
    std::uniform_int_distribution<int> graph_count(1, 12);
    int wanted = graph_count(rng);
    for (int i = 0; i < wanted; ++i) {
        std::vector<std::size_t> parents;
        for (std::size_t g = 0; g < plan.graphs.size(); ++g)
            if (depth[g] < max_depth)
                parents.push_back(g);
        std::size_t parent = parents[std::uniform_int_distribution<std::size_t>(0, parents.size() - 1)(rng)];
        auto path = plan.graphs[parent].path;
        path.push_back("g" + std::to_string(i));
        plan.graphs.push_back({path, parent});
        depth.push_back(depth[parent] + 1);
    }

    std::size_t n = std::uniform_int_distribution<std::size_t>(1, max_nodes)(rng);
    std::uniform_int_distribution<std::size_t> pick_graph(1, plan.graphs.size() - 1);
    const NodeKind kinds[] = {NodeKind::StateVar, NodeKind::Local, NodeKind::Param, NodeKind::Builtin};
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t g = pick_graph(rng);
        auto path = plan.graphs[g].path;
        path.push_back("n" + std::to_string(i));
        plan.nodes.push_back({path, g, kinds[rng() % 4]});
    }

    // Edges: mostly node->node, some node->graph and graph->node.
    std::size_t m = std::uniform_int_distribution<std::size_t>(0, 3 * n)(rng);
    std::uniform_int_distribution<std::size_t> pick_node(0, plan.nodes.size() - 1);
    for (std::size_t i = 0; i < m; ++i) {
        int shape = static_cast<int>(rng() % 10);
        std::pair<bool, std::size_t> a{false, pick_node(rng)};
        std::pair<bool, std::size_t> b{false, pick_node(rng)};
        if (shape == 0)
            a = {true, pick_graph(rng)};
        else if (shape == 1)
            b = {true, pick_graph(rng)};
        plan.edges.emplace_back(a, b);
    }
    return plan;
}

HypernodeGraph materialise(const RandomGraphPlan& plan, const std::vector<std::size_t>& edge_order)
{
    HypernodeGraph h;
    std::vector<GraphId> graphs = {h.root()};
    for (std::size_t i = 1; i < plan.graphs.size(); ++i) {
        const auto& g = plan.graphs[i];
        GraphKind kind = g.parent == 0 ? GraphKind::Contract : GraphKind::Function;
        graphs.push_back(h.add_graph(graphs[g.parent], g.path.back(), kind));
    }
    std::vector<NodeId> nodes;
    for (const auto& n : plan.nodes)
        nodes.push_back(h.add_node(graphs[n.graph], n.path.back(), n.kind));
    auto endpoint = [&](const std::pair<bool, std::size_t>& e) -> Endpoint {
        if (e.first)
            return graphs[e.second];
        return nodes[e.second];
    };
    for (std::size_t i : edge_order) {
        const auto& [a, b] = plan.edges[i];
        h.add_edge(endpoint(a), endpoint(b));
    }
    return h;
}

std::vector<std::string> expected_path(const std::string& contract, const std::string& function, const VarRef& v)
{
    if (v.scope == VarScope::State)
        return {v.owner, v.name};
    return {contract, function, v.name};
}

std::set<std::string> oracle_selection(const std::vector<ContractModel>& models, const HypernodeGraph& graph,
                                       bool constructors)
{
    std::set<Endpoint> sources;
    for (NodeId n : default_sources(graph))
        sources.insert(n);
    auto reach = bfs_reach(collect_edges(graph), sources);
    std::set<std::vector<std::string>> tainted;
    for (const auto& e : reach.nodes)
        if (std::holds_alternative<NodeId>(e))
            tainted.insert(graph.path(e));

    std::set<std::string> owners;
    for (const auto& p : tainted)
        if (p.size() == 2)
            owners.insert(p[0]);

    std::set<std::string> out;
    for (const auto& c : models)
        for (const auto& f : c.functions) {
            if (!f.has_body)
                continue;
            for (const auto& [v, _] : def_use_table(f))
                if (tainted.contains(expected_path(c.name, f.id, v)))
                    out.insert(f.qualified_id());
            bool owns = owners.contains(c.name);
            for (const auto& base : c.inherits)
                owns = owns || owners.contains(base);
            if (constructors && f.is_constructor() && owns)
                out.insert(f.qualified_id());
        }
    return out;
}

namespace {

/// Builds source text and the matching model side by side so spans line up.
class ContractWriter
{
public:
    explicit ContractWriter(std::mt19937& rng)
        : rng_(rng)
    {}

    RandomContracts run()
    {
        RandomContracts out;
        text_ = "pragma solidity ^0.8.0;\n\n";
        int contracts = pick(1, 3);
        for (int c = 0; c < contracts; ++c)
            out.models.push_back(contract("C" + std::to_string(c)));
        out.unit = make_source_unit("random", "random.sol", "random.sol", text_);
        return out;
    }

private:
    int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool chance(int percent) { return pick(1, 100) <= percent; }

    Span mark(std::size_t start) const
    {
        return Span{static_cast<std::uint32_t>(start), static_cast<std::uint32_t>(text_.size() - start), 0};
    }

    ContractModel contract(const std::string& name)
    {
        ContractModel c;
        c.name = name;
        c.kind = "contract";
        std::size_t start = text_.size();
        text_ += "contract " + name + " {\n";
        int vars = pick(0, 5);
        for (int i = 0; i < vars; ++i) {
            text_ += "    ";
            std::size_t decl = text_.size();
            VariableDecl v{"s" + std::to_string(i), "uint256", VarScope::State, {}};
            text_ += "uint256 public " + v.name;
            v.span = mark(decl);
            text_ += ";\n";
            c.state_vars.push_back(v);
        }
        int fns = pick(0, 6);
        bool with_ctor = chance(30);
        for (int i = 0; i < fns + (with_ctor ? 1 : 0); ++i) {
            bool ctor = with_ctor && i == 0;
            std::string id = ctor ? "@ctor" : "f" + std::to_string(i);
            c.functions.push_back(function(c, id));
        }
        // Random intra-contract calls once every function id is known.
        for (auto& f : c.functions)
            for (auto& s : f.statements)
                if (!s.calls.empty() && c.functions.size() > 1) {
                    const auto& target = c.functions[static_cast<std::size_t>(pick(0, static_cast<int>(c.functions.size()) - 1))];
                    if (target.is_constructor())
                        continue;
                    s.calls.front().callee = target.qualified_id();
                    s.calls.front().resolved = true;
                    s.callees = {target.qualified_id()};
                }
        text_ += "}\n\n";
        c.span = mark(start);
        return c;
    }

    FunctionModel function(const ContractModel& c, const std::string& id)
    {
        FunctionModel f;
        f.id = id;
        f.name = id == "@ctor" ? "" : id;
        f.contract = c.name;
        f.has_body = true;
        f.payable = chance(50);
        text_ += "    ";
        std::size_t start = text_.size();
        int params = pick(0, 2);
        std::string signature = id == "@ctor" ? "constructor(" : "function " + id + "(";
        for (int i = 0; i < params; ++i) {
            VariableDecl p{"p" + std::to_string(i), "uint256", VarScope::Param, {}};
            if (i)
                signature += ", ";
            std::size_t decl = start + signature.size();
            signature += "uint256 " + p.name;
            p.span = Span{static_cast<std::uint32_t>(decl), static_cast<std::uint32_t>(8 + p.name.size()), 0};
            f.params.push_back(p);
        }
        signature += ") public";
        signature += f.payable ? " payable {\n" : " {\n";
        text_ += signature;

        std::vector<VarRef> pool;
        for (const auto& p : f.params)
            pool.push_back({VarScope::Param, p.name, {}});
        int locals = pick(0, 3);
        for (int i = 0; i < locals; ++i) {
            f.locals.push_back({"l" + std::to_string(i), "uint256", VarScope::Local, {}});
            pool.push_back({VarScope::Local, f.locals.back().name, {}});
        }
        for (const auto& v : c.state_vars)
            pool.push_back(VarRef::state(c.name, v.name));
        pool.push_back(VarRef::builtin(kMsgSender));
        pool.push_back(VarRef::builtin(kMsgValue));

        int statements = pick(0, 5);
        for (int i = 0; i < statements && !pool.empty(); ++i)
            f.statements.push_back(statement(pool));
        text_ += "    }";
        f.span = mark(start);
        text_ += "\n";
        return f;
    }

    Statement statement(const std::vector<VarRef>& pool)
    {
        Statement s;
        std::vector<VarRef> writable;
        for (const auto& v : pool)
            if (v.scope != VarScope::Builtin)
                writable.push_back(v);
        int uses = pick(0, 3);
        for (int i = 0; i < uses; ++i)
            s.uses.insert(pool[static_cast<std::size_t>(pick(0, static_cast<int>(pool.size()) - 1))]);
        if (!writable.empty() && chance(80))
            s.defs.insert(writable[static_cast<std::size_t>(pick(0, static_cast<int>(writable.size()) - 1))]);
        s.kind = s.defs.empty() ? StatementKind::Call : StatementKind::Assign;
        if (chance(25)) {
            CallSite call;
            call.written = "ext";
            call.args.push_back(s.uses);
            s.calls.push_back(call);
            s.kind = StatementKind::Call;
        }

        std::string line;
        for (const auto& d : s.defs)
            line += d.name + " = ";
        line += "touch(";
        bool first = true;
        for (const auto& u : s.uses) {
            if (!first)
                line += ", ";
            first = false;
            line += u.name;
        }
        line += ")";
        text_ += "        ";
        std::size_t start = text_.size();
        text_ += line;
        s.span = mark(start);
        text_ += ";\n";
        return s;
    }

    std::mt19937& rng_;
    std::string text_;
};

}  // namespace

RandomContracts random_contracts(std::mt19937& rng)
{
    return ContractWriter(rng).run();
}

DetectConfig mock_config(int repeats)
{
    DetectConfig cfg;
    cfg.llm.backend = BackendKind::Mock;
    cfg.llm.model = "mock";
    cfg.repeats = repeats;
    cfg.templates = TemplateSet::load(PONZILENS_TEMPLATE_DIR);
    return cfg;
}

}  // namespace ponzilens::testing
