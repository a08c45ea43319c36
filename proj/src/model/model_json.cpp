#include "ponzilens/model.hpp"

#include <algorithm>

namespace ponzilens {

std::string_view to_string(VarScope scope)
{
    switch (scope) {
    case VarScope::State: return "state";
    case VarScope::Local: return "local";
    case VarScope::Param: return "param";
    case VarScope::Builtin: return "builtin";
    }
    return "unknown";
}

std::string_view to_string(StatementKind kind)
{
    switch (kind) {
    case StatementKind::Assign: return "assign";
    case StatementKind::Declare: return "declare";
    case StatementKind::Call: return "call";
    case StatementKind::ValueTransfer: return "value_transfer";
    case StatementKind::Branch: return "branch";
    case StatementKind::Loop: return "loop";
    case StatementKind::Return: return "return";
    case StatementKind::Emit: return "emit";
    case StatementKind::Opaque: return "opaque";
    }
    return "unknown";
}

std::string_view to_string(Visibility visibility)
{
    switch (visibility) {
    case Visibility::Public: return "public";
    case Visibility::External: return "external";
    case Visibility::Internal: return "internal";
    case Visibility::Private: return "private";
    }
    return "unknown";
}

std::map<VarRef, DefUseEntry> def_use_table(const FunctionModel& function)
{
    std::map<VarRef, DefUseEntry> table;
    for (std::size_t i = 0; i < function.statements.size(); ++i) {
        const Statement& s = function.statements[i];
        for (const auto& d : s.defs)
            table[d].defs.push_back(i);
        for (const auto& u : s.uses)
            table[u].uses.push_back(i);
    }
    return table;
}

namespace {

nlohmann::json var_json(const VarRef& v)
{
    nlohmann::json j = {{"scope", to_string(v.scope)}, {"name", v.name}};
    if (!v.owner.empty())
        j["owner"] = v.owner;
    return j;
}

nlohmann::json vars_json(const VarSet& set)
{
    nlohmann::json out = nlohmann::json::array();
    for (const auto& v : set)
        out.push_back(var_json(v));
    return out;
}

nlohmann::json span_json(const Span& s)
{
    return {{"offset", s.offset}, {"length", s.length}, {"file", s.file}};
}

nlohmann::json decls_json(const std::vector<VariableDecl>& decls)
{
    nlohmann::json out = nlohmann::json::array();
    for (const auto& d : decls)
        out.push_back({{"name", d.name}, {"type", d.type}, {"scope", to_string(d.scope)}});
    return out;
}

}  // namespace

nlohmann::json to_json(const std::vector<ContractModel>& models)
{
    nlohmann::json contracts = nlohmann::json::array();
    for (const auto& c : models) {
        nlohmann::json jc = {{"name", c.name}, {"kind", c.kind}, {"inherits", c.inherits},
                             {"state_vars", decls_json(c.state_vars)}, {"span", span_json(c.span)}};
        nlohmann::json functions = nlohmann::json::array();
        for (const auto& f : c.functions) {
            nlohmann::json jf = {{"id", f.id},
                                 {"name", f.name},
                                 {"visibility", to_string(f.visibility)},
                                 {"payable", f.payable},
                                 {"has_body", f.has_body},
                                 {"params", decls_json(f.params)},
                                 {"returns", decls_json(f.returns)},
                                 {"locals", decls_json(f.locals)},
                                 {"span", span_json(f.span)}};
            nlohmann::json statements = nlohmann::json::array();
            for (const auto& s : f.statements) {
                nlohmann::json js = {{"kind", to_string(s.kind)},
                                     {"defs", vars_json(s.defs)},
                                     {"uses", vars_json(s.uses)},
                                     {"span", span_json(s.span)}};
                if (!s.callees.empty())
                    js["callees"] = s.callees;
                if (!s.guards.empty())
                    js["guards"] = s.guards;
                if (!s.events.empty())
                    js["events"] = s.events;
                statements.push_back(std::move(js));
            }
            jf["statements"] = std::move(statements);
            functions.push_back(std::move(jf));
        }
        jc["functions"] = std::move(functions);
        contracts.push_back(std::move(jc));
    }
    return {{"contracts", std::move(contracts)}};
}

}  // namespace ponzilens
