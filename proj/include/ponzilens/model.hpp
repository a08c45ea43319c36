#pragma once

#include "ponzilens/ingest.hpp"

#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ponzilens {

/// Byte range inside one source file of a unit.
struct Span
{
    std::uint32_t offset = 0;
    std::uint32_t length = 0;
    int file = 0;

    auto operator<=>(const Span&) const = default;
    /// Parses a compiler `src` attribute ("offset:length:file").
    static std::optional<Span> parse(std::string_view src);
};

enum class VarScope { State, Local, Param, Builtin };

inline constexpr std::string_view kMsgSender = "msg.sender";
inline constexpr std::string_view kMsgValue = "msg.value";

/// A variable as seen by the analysis. State variables are keyed by their
/// declaring contract so inherited storage maps to one shared node.
struct VarRef
{
    VarScope scope = VarScope::Local;
    std::string name;
    std::string owner;  // declaring contract; empty unless scope == State

    auto operator<=>(const VarRef&) const = default;

    static VarRef builtin(std::string_view name) { return {VarScope::Builtin, std::string(name), {}}; }
    static VarRef state(std::string owner, std::string name) { return {VarScope::State, std::move(name), std::move(owner)}; }
};

using VarSet = std::set<VarRef>;

struct VariableDecl
{
    std::string name;
    std::string type;
    VarScope scope = VarScope::Local;
    Span span;
};

enum class Visibility { Public, External, Internal, Private };

enum class StatementKind { Assign, Declare, Call, ValueTransfer, Branch, Loop, Return, Emit, Opaque };

/// One call expression inside a statement. `callee` is a qualified function
/// id ("Contract.fn") when the target has a body in this unit.
struct CallSite
{
    std::string callee;
    std::string written;          // callee as spelled in source, for diagnostics
    bool resolved = false;
    std::vector<VarSet> args;     // variables feeding each positional argument
};

struct Statement
{
    StatementKind kind = StatementKind::Assign;
    VarSet defs;
    VarSet uses;
    std::vector<std::string> callees;
    std::vector<CallSite> calls;
    /// Indices of enclosing branch/loop statements, outermost first.
    std::vector<std::size_t> guards;
    std::vector<std::string> events;
    Span span;
};

struct FunctionModel
{
    std::string id;        // unique within the contract: name, `@ctor`, `@fallback`, `@receive`, `name#2`
    std::string name;      // as declared
    std::string contract;
    Visibility visibility = Visibility::Public;
    bool payable = false;
    bool has_body = false;
    std::vector<VariableDecl> params;
    std::vector<VariableDecl> returns;
    std::vector<VariableDecl> locals;
    std::vector<Statement> statements;
    Span span;

    [[nodiscard]] std::string qualified_id() const { return contract + "." + id; }
    [[nodiscard]] bool is_constructor() const { return id == "@ctor"; }
};

struct NamedDecl
{
    std::string name;
    Span span;
};

struct ContractModel
{
    std::string name;
    std::string kind;  // contract, interface, library
    std::vector<VariableDecl> state_vars;
    std::vector<FunctionModel> functions;
    std::vector<std::string> inherits;   // linearised bases, most derived first, excluding self
    std::vector<NamedDecl> structs;
    std::vector<NamedDecl> events;
    Span span;

    [[nodiscard]] const FunctionModel* find_function(std::string_view id) const;
};

/// Lowers every contract definition in the unit. Modifiers are inlined into
/// the functions that use them; unknown statement kinds become opaque
/// statements using every in-scope identifier found in their text.
std::vector<ContractModel> lower(const SourceUnit& unit);

struct DefUseEntry
{
    std::vector<std::size_t> defs;
    std::vector<std::size_t> uses;
};

std::map<VarRef, DefUseEntry> def_use_table(const FunctionModel& function);

std::string_view to_string(VarScope scope);
std::string_view to_string(StatementKind kind);
std::string_view to_string(Visibility visibility);

/// JSON form used by `--dump-ir`.
nlohmann::json to_json(const std::vector<ContractModel>& models);

}  // namespace ponzilens
