#include "ponzilens/error.hpp"
#include "ponzilens/slice.hpp"

#include <algorithm>
#include <tuple>

namespace ponzilens {

namespace {

bool touches(const FunctionModel& f, const std::set<NodeId>& tainted_nodes, const HypernodeGraph& h)
{
    for (const auto& s : f.statements)
        for (const auto* set : {&s.defs, &s.uses})
            for (const auto& v : *set)
                if (auto n = h.find_node(var_path(f.contract, f.id, v)); n && tainted_nodes.contains(*n))
                    return true;
    return false;
}

}  // namespace

std::vector<std::string> select_functions(const TaintSubgraph& t, const HypernodeGraph& h,
                                          const std::vector<ContractModel>& models, const SliceOptions& options)
{
    std::set<NodeId> tainted_nodes;
    std::set<std::string> tainted_owners;
    for (const auto& e : t.tainted)
        if (const auto* n = std::get_if<NodeId>(&e)) {
            tainted_nodes.insert(*n);
            const BasicNode& node = h.node(*n);
            if (node.kind == NodeKind::StateVar)
                tainted_owners.insert(node.path.front());
        }

    std::vector<std::tuple<int, std::uint32_t, std::string>> picked;
    for (const auto& c : models) {
        bool owns_tainted = tainted_owners.contains(c.name);
        for (const auto& base : c.inherits)
            owns_tainted = owns_tainted || tainted_owners.contains(base);
        for (const auto& f : c.functions) {
            if (!f.has_body)
                continue;
            bool take = touches(f, tainted_nodes, h) || (options.include_constructors && f.is_constructor() && owns_tainted);
            if (take)
                picked.emplace_back(f.span.file, f.span.offset, f.qualified_id());
        }
    }
    std::sort(picked.begin(), picked.end());
    std::vector<std::string> out;
    for (auto& p : picked)
        out.push_back(std::move(std::get<2>(p)));
    return out;
}

SliceBundle combine_slices(const std::vector<std::string>& selected, const HypernodeGraph& h,
                           const std::vector<ContractModel>* models)
{
    SliceBundle b;
    std::set<std::string> seen;
    for (const auto& id : selected) {
        if (!seen.insert(id).second)
            continue;
        auto dot = id.find('.');
        std::optional<GraphId> g;
        if (dot != std::string::npos)
            g = h.find_graph({id.substr(0, dot), id.substr(dot + 1)});
        if (!g) {
            b.stats.skipped.push_back(id);
            continue;
        }
        try {
            std::string text = h.source_slice(*g);
            if (!b.combined_text.empty())
                b.combined_text += "\n\n";
            b.combined_text += text;
            b.per_function.emplace(id, std::move(text));
            b.selected.push_back(id);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoSpan)
                throw;
            b.stats.skipped.push_back(id);
        }
    }
    b.stats.selected = b.selected.size();
    b.stats.bytes = b.combined_text.size();

    if (models == nullptr)
        return b;

    std::map<std::string, std::set<std::string>> referenced;  // owner -> state var names
    std::set<std::string> contracts;
    for (const auto& c : *models) {
        for (const auto& f : c.functions) {
            if (f.has_body)
                ++b.stats.functions_total;
            if (!b.per_function.contains(f.qualified_id()))
                continue;
            contracts.insert(c.name);
            for (const auto& s : f.statements)
                for (const auto* set : {&s.defs, &s.uses})
                    for (const auto& v : *set)
                        if (v.scope == VarScope::State)
                            referenced[v.owner].insert(v.name);
        }
    }

    for (const auto& c : *models) {
        std::vector<std::string> lines;
        auto node_text = [&](const std::vector<std::string>& path) -> std::optional<std::string> {
            auto n = h.find_node(path);
            if (!n)
                return std::nullopt;
            try {
                return h.source_slice(*n);
            } catch (const Error&) {
                return std::nullopt;
            }
        };
        for (const auto& sv : c.state_vars)
            if (referenced[c.name].contains(sv.name))
                if (auto text = node_text({c.name, sv.name}))
                    lines.push_back(text->ends_with(';') ? *text : *text + ";");
        if (contracts.contains(c.name)) {
            for (const auto* decls : {&c.structs, &c.events}) {
                for (const auto& d : *decls) {
                    auto cg = h.find_graph({c.name});
                    if (!cg)
                        continue;
                    try {
                        std::string contract_text = h.source_slice(*cg);
                        const Span& cs = *h.graph(*cg).span;
                        if (d.span.file == cs.file && d.span.offset >= cs.offset &&
                            d.span.offset + d.span.length <= cs.offset + cs.length)
                            lines.push_back(contract_text.substr(d.span.offset - cs.offset, d.span.length));
                    } catch (const Error&) {
                    }
                }
            }
        }
        if (lines.empty())
            continue;
        if (!b.header.empty())
            b.header += "\n";
        b.header += "// Declarations from contract " + c.name + "\n";
        for (const auto& l : lines)
            b.header += l + "\n";
    }
    return b;
}

}  // namespace ponzilens
