#include "ponzilens/error.hpp"
#include "ponzilens/hypergraph.hpp"

namespace ponzilens {

std::vector<std::string> var_path(const std::string& contract, const std::string& function, const VarRef& var)
{
    if (var.scope == VarScope::State)
        return {var.owner, var.name};
    return {contract, function, var.name};
}

namespace {

NodeKind kind_of(VarScope scope)
{
    switch (scope) {
    case VarScope::State: return NodeKind::StateVar;
    case VarScope::Param: return NodeKind::Param;
    case VarScope::Builtin: return NodeKind::Builtin;
    case VarScope::Local: break;
    }
    return NodeKind::Local;
}

std::optional<Span> declared_span(const FunctionModel& fn, const VarRef& var)
{
    if (var.scope == VarScope::Builtin)
        return std::nullopt;
    for (const auto* list : {&fn.params, &fn.returns, &fn.locals})
        for (const auto& d : *list)
            if (d.name == var.name)
                return d.span;
    return std::nullopt;
}

class Builder
{
public:
    Builder(const std::vector<ContractModel>& models, const BuildOptions& options)
        : models_(models)
        , options_(options)
    {}

    HypernodeGraph run()
    {
        for (const auto& c : models_) {
            GraphId cg = h_.add_graph(h_.root(), c.name, GraphKind::Contract, c.span);
            for (const auto& f : c.functions)
                if (f.has_body)
                    h_.add_graph(cg, f.id, GraphKind::Function, f.span);
        }
        create_state_nodes();
        for (const auto& c : models_)
            for (const auto& f : c.functions)
                if (f.has_body)
                    local_flow(c, f);
        for (const auto& c : models_)
            for (const auto& f : c.functions)
                if (f.has_body)
                    call_flow(c, f);
        return std::move(h_);
    }

private:
    void create_state_nodes()
    {
        std::set<std::pair<std::string, std::string>> referenced;
        for (const auto& c : models_)
            for (const auto& f : c.functions)
                for (const auto& s : f.statements)
                    for (const auto* set : {&s.uses, &s.defs})
                        for (const auto& v : *set)
                            if (v.scope == VarScope::State)
                                referenced.emplace(v.owner, v.name);
        for (const auto& c : models_) {
            GraphId cg = *h_.find_graph({c.name});
            for (const auto& sv : c.state_vars)
                if (referenced.contains({c.name, sv.name}))
                    h_.add_node(cg, sv.name, NodeKind::StateVar, sv.span);
        }
    }

    NodeId ensure(const ContractModel& c, const FunctionModel& f, const VarRef& v)
    {
        auto path = var_path(c.name, f.id, v);
        if (auto n = h_.find_node(path))
            return *n;
        if (v.scope == VarScope::State) {
            // Owner outside this unit's models: materialise in the owner's graph.
            GraphId owner = h_.add_graph(h_.root(), v.owner, GraphKind::Contract);
            return h_.add_node(owner, v.name, NodeKind::StateVar);
        }
        GraphId fg = *h_.find_graph({c.name, f.id});
        return h_.add_node(fg, v.name, kind_of(v.scope), declared_span(f, v));
    }

    void local_flow(const ContractModel& c, const FunctionModel& f)
    {
        GraphId fg = *h_.find_graph({c.name, f.id});
        for (const auto& s : f.statements) {
            std::vector<NodeId> uses;
            std::vector<NodeId> defs;
            for (const auto& u : s.uses)
                uses.push_back(ensure(c, f, u));
            for (const auto& d : s.defs)
                defs.push_back(ensure(c, f, d));
            for (NodeId u : uses)
                for (NodeId d : defs)
                    h_.add_edge(u, d);
            if (s.kind == StatementKind::Return)
                for (NodeId u : uses)
                    h_.add_edge(u, fg);
            if (options_.implicit_flow)
                for (std::size_t g : s.guards)
                    for (const auto& u : f.statements.at(g).uses)
                        for (NodeId d : defs)
                            h_.add_edge(ensure(c, f, u), d);
        }
        for (const auto& r : f.returns)
            if (!r.name.empty())
                if (auto n = h_.find_node({c.name, f.id, r.name}))
                    h_.add_edge(*n, fg);
    }

    const FunctionModel* find_function(const std::string& qualified) const
    {
        auto dot = qualified.find('.');
        if (dot == std::string::npos)
            return nullptr;
        std::string contract = qualified.substr(0, dot);
        std::string id = qualified.substr(dot + 1);
        for (const auto& c : models_)
            if (c.name == contract)
                return c.find_function(id);
        return nullptr;
    }

    void call_flow(const ContractModel& c, const FunctionModel& f)
    {
        for (const auto& s : f.statements) {
            for (const auto& call : s.calls) {
                const FunctionModel* callee = call.resolved ? find_function(call.callee) : nullptr;
                std::optional<GraphId> cg;
                if (callee != nullptr)
                    cg = h_.find_graph({callee->contract, callee->id});
                if (!cg) {
                    h_.add_diagnostic({f.qualified_id(), call.written,
                                       "UnresolvedCallee: call edge dropped, arguments routed to the external sink"});
                    std::optional<NodeId> sink;
                    for (const auto& arg : call.args)
                        for (const auto& v : arg) {
                            if (!sink)
                                sink = h_.add_node(*h_.find_graph({c.name, f.id}), std::string(kExternalSink), NodeKind::Sink);
                            h_.add_edge(ensure(c, f, v), *sink);
                        }
                    continue;
                }
                for (std::size_t i = 0; i < call.args.size(); ++i) {
                    std::optional<NodeId> param;
                    if (i < callee->params.size() && !callee->params[i].name.empty())
                        param = h_.find_node({callee->contract, callee->id, callee->params[i].name});
                    for (const auto& v : call.args[i]) {
                        NodeId arg = ensure(c, f, v);
                        h_.add_edge(arg, *cg);
                        if (param)
                            h_.add_edge(arg, *param);
                    }
                }
                for (const auto& d : s.defs)
                    h_.add_edge(*cg, ensure(c, f, d));
            }
        }
    }

    const std::vector<ContractModel>& models_;
    BuildOptions options_;
    HypernodeGraph h_;
};

}  // namespace

HypernodeGraph build(const std::vector<ContractModel>& models, const SourceUnit* unit, const BuildOptions& options)
{
    HypernodeGraph h = Builder(models, options).run();
    if (unit != nullptr)
        h.set_sources(std::make_shared<const std::vector<SourceFile>>(unit->files));
    return h;
}

}  // namespace ponzilens
