#include "ponzilens/error.hpp"
#include "ponzilens/model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>
#include <regex>

namespace ponzilens {

namespace {

using nlohmann::json;

enum class DeclKind { StateVar, Variable, Function, Modifier, Contract, Event, Struct, Other };

struct DeclInfo
{
    DeclKind kind = DeclKind::Other;
    std::string name;
    std::string contract;       // owning contract name, when any
    const json* node = nullptr;
    std::string qualified;      // functions with a body: "Contract.fid"
    bool library = false;       // function declared inside a library
};

const std::set<std::string> kValueCallMembers = {"call", "callcode"};
const std::set<std::string> kLowLevelMembers = {"call", "delegatecall", "staticcall", "callcode"};

const json& array_at(const json& node, const char* key)
{
    static const json empty = json::array();
    if (!node.is_object())
        return empty;
    auto it = node.find(key);
    return it != node.end() && it->is_array() ? *it : empty;
}

const json& child_at(const json& node, const char* key)
{
    static const json null_node;
    if (!node.is_object())
        return null_node;
    auto it = node.find(key);
    return it != node.end() ? *it : null_node;
}

std::int64_t ref_id(const json& node, const char* key = "referencedDeclaration")
{
    auto it = node.find(key);
    if (it == node.end() || !it->is_number_integer())
        return -1;
    return it->get<std::int64_t>();
}

std::string node_type(const json& node)
{
    if (!node.is_object())
        return {};
    auto it = node.find("nodeType");
    return it != node.end() && it->is_string() ? it->get<std::string>() : std::string{};
}

Span span_of(const json& node)
{
    auto it = node.find("src");
    if (it == node.end() || !it->is_string())
        return {};
    return Span::parse(it->get<std::string>()).value_or(Span{});
}

std::string type_string(const json& decl)
{
    if (decl.contains("typeDescriptions") && decl["typeDescriptions"].is_object())
        return decl["typeDescriptions"].value("typeString", "");
    return {};
}

bool is_identifier_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '$';
}

/// Accumulated effect of evaluating one expression.
struct Effect
{
    VarSet uses;
    VarSet defs;
    std::vector<CallSite> calls;
    std::vector<std::string> events;
    bool value_transfer = false;

    void merge(Effect&& other)
    {
        uses.insert(other.uses.begin(), other.uses.end());
        defs.insert(other.defs.begin(), other.defs.end());
        for (auto& c : other.calls)
            calls.push_back(std::move(c));
        for (auto& e : other.events)
            events.push_back(std::move(e));
        value_transfer = value_transfer || other.value_transfer;
    }
};

class Lowerer
{
public:
    explicit Lowerer(const SourceUnit& unit)
        : unit_(unit)
    {}

    std::vector<ContractModel> run()
    {
        if (!unit_.ast_json || !unit_.ast_json->contains("sources"))
            throw Error(ErrorCode::MalformedAst, "unit '" + unit_.id + "' has no AST");

        std::vector<std::pair<int, const json*>> roots;
        for (const auto& [name, entry] : (*unit_.ast_json)["sources"].items())
            roots.emplace_back(entry.value("id", 0), &entry["ast"]);
        std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

        for (const auto& [id, root] : roots) {
            if (node_type(*root) != "SourceUnit" || !root->contains("nodes"))
                throw Error(ErrorCode::MalformedAst, "AST root is not a SourceUnit");
            for (const auto& node : (*root)["nodes"])
                if (node_type(node) == "ContractDefinition")
                    contracts_.push_back(&node);
        }
        for (const json* c : contracts_)
            register_contract(*c);
        for (const auto& [id, root] : roots)
            register_variables(*root);

        std::vector<ContractModel> out;
        out.reserve(contracts_.size());
        for (const json* c : contracts_)
            out.push_back(lower_contract(*c));
        return out;
    }

private:
    struct FunctionContext
    {
        FunctionModel* fn = nullptr;
        const ContractModel* contract = nullptr;
        std::map<std::int64_t, VarScope> scopes;
        std::vector<std::size_t> guards;
        std::map<std::string, VarRef> visible_by_name;  // for textual scans
    };

    // ---- registration -------------------------------------------------

    void register_contract(const json& c)
    {
        if (!c.contains("name") || !c.contains("nodes") || !c["nodes"].is_array())
            throw Error(ErrorCode::MalformedAst, "ContractDefinition without name or members");
        std::string cname = c["name"].get<std::string>();
        bool is_library = c.value("contractKind", "contract") == "library";
        decls_[ref_id(c, "id")] = {DeclKind::Contract, cname, cname, &c, {}, is_library};

        std::map<std::string, int> seen;
        for (const auto& member : c["nodes"]) {
            std::string type = node_type(member);
            std::int64_t id = ref_id(member, "id");
            if (type == "VariableDeclaration") {
                decls_[id] = {DeclKind::StateVar, member.value("name", ""), cname, &member, {}, false};
            } else if (type == "FunctionDefinition") {
                if (!member.contains("parameters"))
                    throw Error(ErrorCode::MalformedAst, "FunctionDefinition without parameters in " + cname);
                std::string fid = function_id(member, cname, seen);
                DeclInfo info{DeclKind::Function, member.value("name", ""), cname, &member, {}, is_library};
                if (has_body(member))
                    info.qualified = cname + "." + fid;
                function_ids_[&member] = fid;
                decls_[id] = std::move(info);
            } else if (type == "ModifierDefinition") {
                decls_[id] = {DeclKind::Modifier, member.value("name", ""), cname, &member, {}, false};
            } else if (type == "EventDefinition") {
                decls_[id] = {DeclKind::Event, member.value("name", ""), cname, &member, {}, false};
            } else if (type == "StructDefinition") {
                decls_[id] = {DeclKind::Struct, member.value("name", ""), cname, &member, {}, false};
            }
        }
    }

    void register_variables(const json& node)
    {
        if (node.is_object()) {
            if (node_type(node) == "VariableDeclaration" && !node.value("stateVariable", false)) {
                std::int64_t id = ref_id(node, "id");
                if (!decls_.contains(id))
                    decls_[id] = {DeclKind::Variable, node.value("name", ""), {}, &node, {}, false};
            }
            for (const auto& [k, v] : node.items())
                if (v.is_structured())
                    register_variables(v);
        } else if (node.is_array()) {
            for (const auto& v : node)
                register_variables(v);
        }
    }

    static bool has_body(const json& fn)
    {
        return fn.contains("body") && fn["body"].is_object() && fn.value("implemented", true);
    }

    static std::string function_id(const json& fn, const std::string& contract, std::map<std::string, int>& seen)
    {
        std::string kind = fn.value("kind", "");
        std::string name = fn.value("name", "");
        std::string id;
        if (kind == "constructor" || fn.value("isConstructor", false) || (kind.empty() && name == contract))
            id = "@ctor";
        else if (kind == "fallback" || (kind.empty() && name.empty()))
            id = "@fallback";
        else if (kind == "receive")
            id = "@receive";
        else
            id = name;
        int n = ++seen[id];
        return n == 1 ? id : id + "#" + std::to_string(n);
    }

    // ---- contracts ----------------------------------------------------

    ContractModel lower_contract(const json& c)
    {
        ContractModel model;
        model.name = c["name"].get<std::string>();
        model.kind = c.value("contractKind", "contract");
        model.span = span_of(c);

        std::int64_t self = ref_id(c, "id");
        if (c.contains("linearizedBaseContracts")) {
            for (const auto& base : c["linearizedBaseContracts"]) {
                std::int64_t bid = base.get<std::int64_t>();
                if (bid == self)
                    continue;
                auto it = decls_.find(bid);
                if (it != decls_.end())
                    model.inherits.push_back(it->second.name);
            }
        }

        for (const auto& member : c["nodes"]) {
            std::string type = node_type(member);
            if (type == "VariableDeclaration")
                model.state_vars.push_back({member.value("name", ""), type_string(member), VarScope::State, span_of(member)});
            else if (type == "StructDefinition")
                model.structs.push_back({member.value("name", ""), span_of(member)});
            else if (type == "EventDefinition")
                model.events.push_back({member.value("name", ""), span_of(member)});
        }

        // Names visible to textual scans: own state first, then bases.
        std::map<std::string, VarRef> visible;
        std::vector<const json*> chain = {&c};
        for (const auto& base_name : model.inherits)
            for (const json* other : contracts_)
                if ((*other)["name"] == base_name)
                    chain.push_back(other);
        for (const json* owner : chain)
            for (const auto& member : (*owner)["nodes"])
                if (node_type(member) == "VariableDeclaration") {
                    std::string name = member.value("name", "");
                    visible.emplace(name, VarRef::state((*owner)["name"].get<std::string>(), name));
                }

        for (const auto& member : c["nodes"]) {
            if (node_type(member) != "FunctionDefinition")
                continue;
            FunctionModel fn;
            fn.id = function_ids_.at(&member);
            fn.name = member.value("name", "");
            fn.contract = model.name;
            fn.span = span_of(member);
            fn.has_body = has_body(member);
            std::string vis = member.value("visibility", "public");
            fn.visibility = vis == "external" ? Visibility::External
                            : vis == "internal" ? Visibility::Internal
                            : vis == "private"  ? Visibility::Private
                                                : Visibility::Public;
            fn.payable = member.value("stateMutability", "") == "payable" || member.value("payable", false);
            model.functions.push_back(std::move(fn));
            lower_function(member, model.functions.back(), model, visible);
        }
        return model;
    }

    void lower_function(const json& node, FunctionModel& fn, const ContractModel& contract, const std::map<std::string, VarRef>& visible)
    {
        FunctionContext ctx;
        ctx.fn = &fn;
        ctx.contract = &contract;
        ctx.visible_by_name = visible;

        for (const auto& p : array_at(node["parameters"], "parameters")) {
            fn.params.push_back({p.value("name", ""), type_string(p), VarScope::Param, span_of(p)});
            ctx.scopes[ref_id(p, "id")] = VarScope::Param;
            if (!p.value("name", "").empty())
                ctx.visible_by_name[p.value("name", "")] = {VarScope::Param, p.value("name", ""), {}};
        }
        if (node.contains("returnParameters") && node["returnParameters"].is_object()) {
            for (const auto& p : array_at(node["returnParameters"], "parameters")) {
                fn.returns.push_back({p.value("name", ""), type_string(p), VarScope::Local, span_of(p)});
                ctx.scopes[ref_id(p, "id")] = VarScope::Local;
                if (!p.value("name", "").empty())
                    ctx.visible_by_name[p.value("name", "")] = {VarScope::Local, p.value("name", ""), {}};
            }
        }
        if (!fn.has_body)
            return;

        collect_locals(node["body"], ctx, true);

        std::vector<const json*> invocations;
        if (node.contains("modifiers") && node["modifiers"].is_array())
            for (const auto& m : node["modifiers"])
                invocations.push_back(&m);
        lower_with_modifiers(node["body"], invocations, 0, ctx);
    }

    /// Registers every local declared under `node`. `record` adds them to the
    /// function's declared locals (modifier locals are tracked but not listed).
    void collect_locals(const json& node, FunctionContext& ctx, bool record)
    {
        if (node.is_object()) {
            if (node_type(node) == "VariableDeclaration") {
                std::int64_t id = ref_id(node, "id");
                if (!ctx.scopes.contains(id)) {
                    ctx.scopes[id] = VarScope::Local;
                    std::string name = node.value("name", "");
                    if (record)
                        ctx.fn->locals.push_back({name, type_string(node), VarScope::Local, span_of(node)});
                    if (!name.empty())
                        ctx.visible_by_name[name] = {VarScope::Local, name, {}};
                }
            }
            for (const auto& [k, v] : node.items())
                if (v.is_structured())
                    collect_locals(v, ctx, record);
        } else if (node.is_array()) {
            for (const auto& v : node)
                collect_locals(v, ctx, record);
        }
    }

    void lower_with_modifiers(const json& body, const std::vector<const json*>& invocations, std::size_t index, FunctionContext& ctx)
    {
        while (index < invocations.size()) {
            const json& inv = *invocations[index];
            std::int64_t target = inv.contains("modifierName") ? ref_id(inv["modifierName"]) : -1;
            auto it = decls_.find(target);
            if (it == decls_.end() || it->second.kind == DeclKind::Contract) {
                // Base constructor specifier or unknown modifier: keep argument flows.
                Effect e;
                std::vector<VarSet> args;
                for (const auto& a : array_at(inv, "arguments")) {
                    Effect ae = eval(a, ctx);
                    args.push_back(ae.uses);
                    e.merge(std::move(ae));
                }
                if (it != decls_.end()) {
                    CallSite site;
                    site.written = it->second.name;
                    site.args = std::move(args);
                    if (const DeclInfo* ctor = find_constructor(it->second.name)) {
                        site.callee = ctor->qualified;
                        site.resolved = true;
                    }
                    e.calls.push_back(std::move(site));
                }
                if (!e.uses.empty() || !e.calls.empty())
                    push_statement(StatementKind::Call, std::move(e), span_of(inv), ctx);
                ++index;
                continue;
            }
            if (it->second.kind != DeclKind::Modifier) {
                ++index;
                continue;
            }

            const json& modifier = *it->second.node;
            const auto& params = array_at(modifier["parameters"], "parameters");
            const auto& args = array_at(inv, "arguments");
            for (std::size_t i = 0; i < params.size(); ++i) {
                ctx.scopes[ref_id(params[i], "id")] = VarScope::Local;
                Effect e;
                if (i < args.size() && !args[i].is_null())
                    e = eval(args[i], ctx);
                e.defs.insert({VarScope::Local, params[i].value("name", ""), {}});
                push_statement(StatementKind::Declare, std::move(e), span_of(inv), ctx);
            }
            if (!modifier.contains("body") || !modifier["body"].is_object())
                return;
            collect_locals(modifier["body"], ctx, false);
            lower_block(modifier["body"], ctx, [&, next = index + 1] { lower_with_modifiers(body, invocations, next, ctx); });
            return;
        }
        lower_block(body, ctx, {});
    }

    const DeclInfo* find_constructor(const std::string& contract) const
    {
        for (const auto& [id, d] : decls_)
            if (d.kind == DeclKind::Function && d.contract == contract && !d.qualified.empty() &&
                d.qualified == contract + ".@ctor")
                return &d;
        return nullptr;
    }

    // ---- statements ---------------------------------------------------

    using Placeholder = std::function<void()>;

    void lower_block(const json& node, FunctionContext& ctx, const Placeholder& placeholder)
    {
        lower_statement(node, ctx, placeholder);
    }

    std::size_t push_statement(StatementKind kind, Effect&& e, Span span, FunctionContext& ctx)
    {
        Statement s;
        s.kind = kind;
        for (const auto& d : e.defs)
            if (d.scope != VarScope::Builtin)
                s.defs.insert(d);
        s.uses = std::move(e.uses);
        for (const auto& c : e.calls)
            s.callees.push_back(c.resolved ? c.callee : "@external:" + c.written);
        s.calls = std::move(e.calls);
        s.events = std::move(e.events);
        s.guards = ctx.guards;
        s.span = span;
        ctx.fn->statements.push_back(std::move(s));
        return ctx.fn->statements.size() - 1;
    }

    void lower_statement(const json& node, FunctionContext& ctx, const Placeholder& placeholder)
    {
        if (node.is_null())
            return;
        std::string type = node_type(node);
        Span span = span_of(node);

        if (type == "Block" || type == "UncheckedBlock") {
            for (const auto& s : array_at(node, "statements"))
                lower_statement(s, ctx, placeholder);
        } else if (type == "PlaceholderStatement") {
            if (placeholder)
                placeholder();
        } else if (type == "ExpressionStatement") {
            const json& expr = node["expression"];
            Effect e = eval(expr, ctx);
            std::string top = node_type(expr);
            StatementKind kind = StatementKind::Assign;
            if (e.value_transfer)
                kind = StatementKind::ValueTransfer;
            else if (top == "FunctionCall")
                kind = e.events.empty() || !e.calls.empty() ? StatementKind::Call : StatementKind::Emit;
            push_statement(kind, std::move(e), span, ctx);
        } else if (type == "VariableDeclarationStatement") {
            Effect e;
            if (node.contains("initialValue") && !node["initialValue"].is_null())
                e = eval(node["initialValue"], ctx);
            for (const auto& d : array_at(node, "declarations"))
                if (d.is_object() && !d.value("name", "").empty())
                    e.defs.insert({VarScope::Local, d["name"].get<std::string>(), {}});
            StatementKind kind = e.value_transfer ? StatementKind::ValueTransfer : StatementKind::Declare;
            push_statement(kind, std::move(e), span, ctx);
        } else if (type == "IfStatement") {
            std::size_t idx = push_statement(StatementKind::Branch, eval(node["condition"], ctx), span, ctx);
            ctx.guards.push_back(idx);
            lower_statement(child_at(node, "trueBody"), ctx, placeholder);
            lower_statement(child_at(node, "falseBody"), ctx, placeholder);
            ctx.guards.pop_back();
        } else if (type == "WhileStatement" || type == "DoWhileStatement") {
            std::size_t idx = push_statement(StatementKind::Loop, eval(node["condition"], ctx), span, ctx);
            ctx.guards.push_back(idx);
            lower_statement(child_at(node, "body"), ctx, placeholder);
            ctx.guards.pop_back();
        } else if (type == "ForStatement") {
            lower_statement(child_at(node, "initializationExpression"), ctx, placeholder);
            Effect cond;
            if (node.contains("condition") && !node["condition"].is_null())
                cond = eval(node["condition"], ctx);
            std::size_t idx = push_statement(StatementKind::Loop, std::move(cond), span, ctx);
            ctx.guards.push_back(idx);
            lower_statement(child_at(node, "body"), ctx, placeholder);
            lower_statement(child_at(node, "loopExpression"), ctx, placeholder);
            ctx.guards.pop_back();
        } else if (type == "Return") {
            Effect e;
            if (node.contains("expression") && !node["expression"].is_null())
                e = eval(node["expression"], ctx);
            push_statement(StatementKind::Return, std::move(e), span, ctx);
        } else if (type == "EmitStatement") {
            Effect e = eval(node["eventCall"], ctx);
            push_statement(StatementKind::Emit, std::move(e), span, ctx);
        } else if (type == "RevertStatement") {
            push_statement(StatementKind::Call, eval(node["errorCall"], ctx), span, ctx);
        } else if (type == "TryStatement") {
            Effect e = eval(node["externalCall"], ctx);
            for (const auto& clause : array_at(node, "clauses"))
                if (clause.contains("parameters") && clause["parameters"].is_object())
                    for (const auto& p : array_at(clause["parameters"], "parameters"))
                        if (!p.value("name", "").empty())
                            e.defs.insert({VarScope::Local, p["name"].get<std::string>(), {}});
            StatementKind kind = e.value_transfer ? StatementKind::ValueTransfer : StatementKind::Call;
            std::size_t idx = push_statement(kind, std::move(e), span, ctx);
            ctx.guards.push_back(idx);
            for (const auto& clause : array_at(node, "clauses"))
                lower_statement(child_at(clause, "block"), ctx, placeholder);
            ctx.guards.pop_back();
        } else if (type == "Break" || type == "Continue" || type == "Throw") {
            // no data flow
        } else {
            // InlineAssembly and node kinds this lowering does not know.
            Effect e = opaque_effect(node, ctx);
            push_statement(StatementKind::Opaque, std::move(e), span, ctx);
        }
    }

    // ---- expressions --------------------------------------------------

    std::optional<VarRef> resolve_variable(std::int64_t id, const FunctionContext& ctx) const
    {
        auto it = decls_.find(id);
        if (it == decls_.end())
            return std::nullopt;
        if (it->second.kind == DeclKind::StateVar)
            return VarRef::state(it->second.contract, it->second.name);
        if (it->second.kind == DeclKind::Variable) {
            auto scope = ctx.scopes.find(id);
            if (scope == ctx.scopes.end() || it->second.name.empty())
                return std::nullopt;
            return VarRef{scope->second, it->second.name, {}};
        }
        return std::nullopt;
    }

    static bool is_msg_member(const json& expr, std::string_view member)
    {
        return node_type(expr) == "MemberAccess" && expr.value("memberName", "") == member &&
               node_type(expr["expression"]) == "Identifier" && expr["expression"].value("name", "") == "msg";
    }

    Effect eval(const json& expr, FunctionContext& ctx)
    {
        Effect e;
        if (!expr.is_object())
            return e;
        std::string type = node_type(expr);

        if (type == "Identifier") {
            if (auto v = resolve_variable(ref_id(expr), ctx))
                e.uses.insert(*v);
        } else if (type == "MemberAccess") {
            if (is_msg_member(expr, "sender"))
                e.uses.insert(VarRef::builtin(kMsgSender));
            else if (is_msg_member(expr, "value"))
                e.uses.insert(VarRef::builtin(kMsgValue));
            else
                e.merge(eval(expr["expression"], ctx));
        } else if (type == "IndexAccess") {
            e.merge(eval(expr["baseExpression"], ctx));
            if (expr.contains("indexExpression"))
                e.merge(eval(expr["indexExpression"], ctx));
        } else if (type == "IndexRangeAccess") {
            e.merge(eval(expr["baseExpression"], ctx));
            for (const char* k : {"startExpression", "endExpression"})
                if (expr.contains(k))
                    e.merge(eval(expr[k], ctx));
        } else if (type == "Assignment") {
            Effect target = lvalue(expr["leftHandSide"], ctx);
            Effect rhs = eval(expr["rightHandSide"], ctx);
            if (expr.value("operator", "=") != "=")
                target.uses.insert(target.defs.begin(), target.defs.end());
            e.merge(std::move(target));
            e.merge(std::move(rhs));
        } else if (type == "UnaryOperation") {
            std::string op = expr.value("operator", "");
            if (op == "++" || op == "--" || op == "delete") {
                Effect target = lvalue(expr["subExpression"], ctx);
                if (op != "delete")
                    target.uses.insert(target.defs.begin(), target.defs.end());
                e.merge(std::move(target));
            } else {
                e.merge(eval(expr["subExpression"], ctx));
            }
        } else if (type == "BinaryOperation") {
            e.merge(eval(expr["leftExpression"], ctx));
            e.merge(eval(expr["rightExpression"], ctx));
        } else if (type == "Conditional") {
            for (const char* k : {"condition", "trueExpression", "falseExpression"})
                e.merge(eval(expr[k], ctx));
        } else if (type == "TupleExpression") {
            for (const auto& c : array_at(expr, "components"))
                e.merge(eval(c, ctx));
        } else if (type == "FunctionCall") {
            e.merge(eval_call(expr, ctx));
        } else if (type == "FunctionCallOptions") {
            e.merge(eval(expr["expression"], ctx));
            for (const auto& o : array_at(expr, "options"))
                e.merge(eval(o, ctx));
        } else if (type == "NewExpression" || type == "ElementaryTypeNameExpression" || type == "Literal") {
            // no variables
        } else {
            e.merge(opaque_effect(expr, ctx));
        }
        return e;
    }

    /// Write target: the base variable of the access path is defined; index
    /// expressions along the path are read.
    Effect lvalue(const json& expr, FunctionContext& ctx)
    {
        Effect e;
        std::string type = node_type(expr);
        if (type == "Identifier") {
            if (auto v = resolve_variable(ref_id(expr), ctx))
                e.defs.insert(*v);
        } else if (type == "MemberAccess") {
            e.merge(lvalue(expr["expression"], ctx));
        } else if (type == "IndexAccess") {
            e.merge(lvalue(expr["baseExpression"], ctx));
            if (expr.contains("indexExpression"))
                e.merge(eval(expr["indexExpression"], ctx));
        } else if (type == "TupleExpression") {
            for (const auto& c : array_at(expr, "components"))
                if (c.is_object())
                    e.merge(lvalue(c, ctx));
        } else {
            e.merge(eval(expr, ctx));
        }
        return e;
    }

    Effect eval_call(const json& call, FunctionContext& ctx)
    {
        Effect e;
        std::vector<VarSet> args;
        for (const auto& a : array_at(call, "arguments")) {
            Effect ae = eval(a, ctx);
            args.push_back(ae.uses);
            e.merge(std::move(ae));
        }

        std::string kind = call.value("kind", "functionCall");
        if (kind == "typeConversion" || kind == "structConstructorCall") {
            e.merge(eval(call["expression"], ctx));
            return e;
        }

        // Peel call options: `x.call{value: v}` and the 0.4 form `x.call.value(v)`.
        const json* callee = &call["expression"];
        bool sends_value = false;
        while (true) {
            std::string ct = node_type(*callee);
            if (ct == "FunctionCallOptions") {
                for (const auto& n : array_at(*callee, "names"))
                    if (n == "value")
                        sends_value = true;
                for (const auto& o : array_at(*callee, "options"))
                    e.merge(eval(o, ctx));
                callee = &(*callee)["expression"];
                continue;
            }
            if (ct == "FunctionCall" && node_type((*callee)["expression"]) == "MemberAccess") {
                std::string member = (*callee)["expression"].value("memberName", "");
                if (member == "value" || member == "gas") {
                    if (member == "value")
                        sends_value = true;
                    for (const auto& a : array_at(*callee, "arguments"))
                        e.merge(eval(a, ctx));
                    callee = &(*callee)["expression"]["expression"];
                    continue;
                }
            }
            break;
        }

        std::string ct = node_type(*callee);
        if (ct == "MemberAccess") {
            const json& base = (*callee)["expression"];
            std::string member = callee->value("memberName", "");
            std::int64_t target = ref_id(*callee);
            auto decl = decls_.find(target);

            if (decl == decls_.end()) {
                // Builtin members on addresses, arrays and the like.
                if ((member == "send" || member == "transfer") && args.size() == 1) {
                    e.merge(eval(base, ctx));
                    e.value_transfer = true;
                    return e;
                }
                if (kValueCallMembers.contains(member) && sends_value) {
                    e.merge(eval(base, ctx));
                    e.value_transfer = true;
                    return e;
                }
                if (member == "push" || member == "pop") {
                    Effect target_effect = lvalue(base, ctx);
                    target_effect.uses.insert(target_effect.defs.begin(), target_effect.defs.end());
                    e.merge(std::move(target_effect));
                    return e;
                }
                e.merge(eval(base, ctx));
                if (kLowLevelMembers.contains(member)) {
                    CallSite site;
                    site.written = member;
                    site.args = std::move(args);
                    e.calls.push_back(std::move(site));
                }
                return e;
            }

            if (decl->second.kind == DeclKind::Event) {
                e.events.push_back(decl->second.name);
                return e;
            }
            if (decl->second.kind != DeclKind::Function) {
                e.merge(eval(base, ctx));
                return e;
            }

            bool internal = false;
            bool bound_library = false;
            if (node_type(base) == "Identifier") {
                std::string bname = base.value("name", "");
                auto bdecl = decls_.find(ref_id(base));
                if (bname == "this" || bname == "super" || (bdecl != decls_.end() && bdecl->second.kind == DeclKind::Contract))
                    internal = true;
            }
            if (!internal && decl->second.library) {
                // `x.fn(y)` through `using Lib for T`: the receiver is the first argument.
                internal = true;
                bound_library = true;
            }
            Effect receiver = eval(base, ctx);
            CallSite site;
            site.written = decl->second.contract + "." + decl->second.name;
            if (bound_library)
                args.insert(args.begin(), receiver.uses);
            e.merge(std::move(receiver));
            site.args = reorder_named(call, *decl->second.node, std::move(args), bound_library);
            if (internal && !decl->second.qualified.empty()) {
                site.callee = decl->second.qualified;
                site.resolved = true;
            }
            if (sends_value)
                e.value_transfer = true;
            e.calls.push_back(std::move(site));
            return e;
        }

        if (ct == "Identifier") {
            std::string name = callee->value("name", "");
            auto decl = decls_.find(ref_id(*callee));
            if (decl != decls_.end()) {
                if (decl->second.kind == DeclKind::Event) {
                    e.events.push_back(decl->second.name);
                    return e;
                }
                if (decl->second.kind == DeclKind::Function) {
                    CallSite site;
                    site.written = decl->second.contract + "." + decl->second.name;
                    site.args = reorder_named(call, *decl->second.node, std::move(args), false);
                    if (!decl->second.qualified.empty()) {
                        site.callee = decl->second.qualified;
                        site.resolved = true;
                    }
                    e.calls.push_back(std::move(site));
                    return e;
                }
                if (auto v = resolve_variable(ref_id(*callee), ctx)) {
                    // Call through a function-typed variable: dynamic target.
                    e.uses.insert(*v);
                    CallSite site;
                    site.written = name;
                    site.args = std::move(args);
                    e.calls.push_back(std::move(site));
                }
                return e;
            }
            if (name == "selfdestruct" || name == "suicide")
                e.value_transfer = true;
            return e;
        }

        if (ct != "NewExpression")
            e.merge(eval(*callee, ctx));
        return e;
    }

    /// Named-argument calls list arguments in `names` order; map them back to
    /// the callee's parameter order.
    static std::vector<VarSet> reorder_named(const json& call, const json& fn, std::vector<VarSet> args, bool skip_first)
    {
        const auto& names = array_at(call, "names");
        if (names.empty() || !fn.contains("parameters"))
            return args;
        const auto& params = array_at(fn["parameters"], "parameters");
        std::vector<VarSet> out(params.size());
        std::size_t offset = skip_first ? 1 : 0;
        if (skip_first && !args.empty() && !out.empty())
            out[0] = args[0];
        for (std::size_t i = 0; i < names.size() && i + offset < args.size(); ++i) {
            for (std::size_t p = 0; p < params.size(); ++p)
                if (params[p].value("name", "") == names[i])
                    out[p] = args[i + offset];
        }
        return out;
    }

    // ---- opaque nodes -------------------------------------------------

    void collect_references(const json& node, FunctionContext& ctx, VarSet& out) const
    {
        if (node.is_object()) {
            for (const char* key : {"referencedDeclaration", "declaration"}) {
                std::int64_t id = ref_id(node, key);
                if (id >= 0)
                    if (auto v = resolve_variable(id, ctx))
                        out.insert(*v);
            }
            for (const auto& [k, v] : node.items())
                if (v.is_structured())
                    collect_references(v, ctx, out);
        } else if (node.is_array()) {
            for (const auto& v : node)
                collect_references(v, ctx, out);
        }
    }

    /// Over-approximates an uninterpreted node: it reads every in-scope name
    /// that occurs in its text, plus any declarations it references.
    Effect opaque_effect(const json& node, FunctionContext& ctx) const
    {
        Effect e;
        collect_references(node, ctx, e.uses);
        Span span = span_of(node);
        const std::string* text = unit_.file_text(span.file);
        if (text == nullptr || span.offset + span.length > text->size())
            return e;
        std::string_view body(text->data() + span.offset, span.length);

        static const std::regex sender(R"(msg\s*\.\s*sender\b|\bcaller\s*\(\s*\))");
        static const std::regex value(R"(msg\s*\.\s*value\b|\bcallvalue\s*\(\s*\))");
        if (std::regex_search(body.begin(), body.end(), sender))
            e.uses.insert(VarRef::builtin(kMsgSender));
        if (std::regex_search(body.begin(), body.end(), value))
            e.uses.insert(VarRef::builtin(kMsgValue));

        std::size_t i = 0;
        while (i < body.size()) {
            if (!is_identifier_char(body[i]) || std::isdigit(static_cast<unsigned char>(body[i]))) {
                // skip numbers as whole tokens
                if (std::isdigit(static_cast<unsigned char>(body[i])))
                    while (i < body.size() && is_identifier_char(body[i]))
                        ++i;
                else
                    ++i;
                continue;
            }
            std::size_t start = i;
            while (i < body.size() && is_identifier_char(body[i]))
                ++i;
            bool member = start > 0 && body[start - 1] == '.';
            if (member)
                continue;
            auto it = ctx.visible_by_name.find(std::string(body.substr(start, i - start)));
            if (it != ctx.visible_by_name.end())
                e.uses.insert(it->second);
        }
        return e;
    }

    const SourceUnit& unit_;
    std::vector<const json*> contracts_;
    std::map<std::int64_t, DeclInfo> decls_;
    std::map<const json*, std::string> function_ids_;
};

}  // namespace

std::optional<Span> Span::parse(std::string_view src)
{
    Span out;
    std::int64_t parts[3] = {0, 0, 0};
    const char* p = src.data();
    const char* end = src.data() + src.size();
    for (int i = 0; i < 3; ++i) {
        auto [ptr, ec] = std::from_chars(p, end, parts[i]);
        if (ec != std::errc{})
            return std::nullopt;
        p = ptr;
        if (i < 2) {
            if (p == end || *p != ':')
                return std::nullopt;
            ++p;
        }
    }
    if (parts[0] < 0 || parts[1] < 0)
        return std::nullopt;
    out.offset = static_cast<std::uint32_t>(parts[0]);
    out.length = static_cast<std::uint32_t>(parts[1]);
    out.file = static_cast<int>(parts[2]);
    return out;
}

const FunctionModel* ContractModel::find_function(std::string_view id) const
{
    for (const auto& f : functions)
        if (f.id == id)
            return &f;
    return nullptr;
}

std::vector<ContractModel> lower(const SourceUnit& unit)
{
    try {
        return Lowerer(unit).run();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedAst, std::string("unexpected AST shape: ") + e.what());
    }
}

}  // namespace ponzilens
