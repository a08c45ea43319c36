#include "support.hpp"

#include <gtest/gtest.h>

#include <regex>

namespace ponzilens {
namespace {

using testing::load_fixture;

VarRef local(const std::string& n)
{
    return {VarScope::Local, n, {}};
}

VarRef state(const std::string& n)
{
    return VarRef::state("Doubler", n);
}

struct Expected
{
    std::string text;  // statement source text prefix
    StatementKind kind;
    VarSet defs;
    VarSet uses;
};

const FunctionModel& only_function(const std::vector<ContractModel>& models, const std::string& contract, const std::string& id)
{
    for (const auto& c : models)
        if (c.name == contract)
            if (const auto* f = c.find_function(id))
                return *f;
    throw std::runtime_error("missing function " + contract + "." + id);
}

std::string span_text(const SourceUnit& unit, const Span& s)
{
    return unit.source_text().substr(s.offset, s.length);
}

TEST(Lower, DoublerStatementsMatchHandLoweredTable)
{
    SourceUnit unit = load_fixture("doubler");
    auto models = lower(unit);
    const auto& enter = only_function(models, "Doubler", "enter");
    const VarRef value = VarRef::builtin(kMsgValue);
    const VarRef sender = VarRef::builtin(kMsgSender);

    // Written by hand from the source; one row per statement in order.
    const std::vector<Expected> table = {
        {"uint amount", StatementKind::Declare, {local("amount")}, {}},
        {"amount = msg.value", StatementKind::Assign, {local("amount")}, {value}},
        {"uint idx = persons.length", StatementKind::Declare, {local("idx")}, {state("persons")}},
        {"persons.length += 1", StatementKind::Assign, {state("persons")}, {state("persons")}},
        {"persons[idx].etherAddress = msg.sender", StatementKind::Assign, {state("persons")}, {local("idx"), sender}},
        {"persons[idx].amount = amount", StatementKind::Assign, {state("persons")}, {local("idx"), local("amount")}},
        {"balance += amount", StatementKind::Assign, {state("balance")}, {state("balance"), local("amount")}},
        {"while", StatementKind::Loop, {}, {state("balance"), state("persons"), state("payoutIdx")}},
        {"uint transactionAmount", StatementKind::Declare, {local("transactionAmount")}, {state("persons"), state("payoutIdx")}},
        {"persons[payoutIdx].etherAddress.send", StatementKind::ValueTransfer, {}, {state("persons"), state("payoutIdx"), local("transactionAmount")}},
        {"balance -= transactionAmount", StatementKind::Assign, {state("balance")}, {state("balance"), local("transactionAmount")}},
        {"payoutIdx += 1", StatementKind::Assign, {state("payoutIdx")}, {state("payoutIdx")}},
    };
    ASSERT_EQ(enter.statements.size(), table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto& s = enter.statements[i];
        SCOPED_TRACE(table[i].text);
        EXPECT_EQ(span_text(unit, s.span).rfind(table[i].text, 0), 0u) << span_text(unit, s.span);
        EXPECT_EQ(s.kind, table[i].kind);
        EXPECT_EQ(s.defs, table[i].defs);
        EXPECT_EQ(s.uses, table[i].uses);
    }
    // The loop body is guarded by the while statement.
    EXPECT_EQ(enter.statements[8].guards, std::vector<std::size_t>{7});
}

TEST(Lower, EmptyBodyHasNoStatements)
{
    auto models = lower(load_fixture("shared_balance"));
    const auto& noop = only_function(models, "SharedBalance", "noop");
    EXPECT_TRUE(noop.has_body);
    EXPECT_TRUE(noop.statements.empty());
    EXPECT_TRUE(def_use_table(noop).empty());
}

TEST(Lower, SyntheticIdsForSpecialFunctions)
{
    auto models = lower(load_fixture("owner_ctor"));
    ASSERT_EQ(models.size(), 1u);
    const auto* ctor = models[0].find_function("@ctor");
    ASSERT_NE(ctor, nullptr);
    EXPECT_TRUE(ctor->is_constructor());
    ASSERT_EQ(ctor->statements.size(), 1u);
    EXPECT_EQ(ctor->statements[0].defs, (VarSet{VarRef::state("Owned", "owner")}));
    EXPECT_EQ(ctor->statements[0].uses, (VarSet{VarRef::builtin(kMsgSender)}));
}

TEST(Lower, ValueTransferUsesRecipient)
{
    auto models = lower(load_fixture("payout_queue"));
    const auto& invest = only_function(models, "PayoutQueue", "invest");
    bool found = false;
    for (const auto& s : invest.statements)
        if (s.kind == StatementKind::ValueTransfer) {
            found = true;
            EXPECT_TRUE(s.uses.contains(VarRef::state("PayoutQueue", "investors")));
            EXPECT_TRUE(s.uses.contains(local("due")));
        }
    EXPECT_TRUE(found);
}

TEST(Lower, ModifiersAreInlined)
{
    auto models = lower(load_fixture("features"));
    const auto& sweep = only_function(models, "Fund", "sweep");
    bool admin_read = false;
    for (const auto& s : sweep.statements)
        if (s.uses.contains(VarRef::state("Base", "admin")))
            admin_read = true;
    EXPECT_TRUE(admin_read);
}

TEST(Lower, InheritedStateVariablesKeepTheirOwner)
{
    auto models = lower(load_fixture("features"));
    const auto& ctor = only_function(models, "Fund", "@ctor");
    ASSERT_FALSE(ctor.statements.empty());
    EXPECT_TRUE(ctor.statements[0].defs.contains(VarRef::state("Base", "admin")));
}

TEST(Lower, AssemblyBecomesOpaqueWithoutDefs)
{
    SourceUnit unit = load_fixture("features");
    auto models = lower(unit);
    const auto& mark = only_function(models, "Fund", "mark");
    bool opaque = false;
    for (const auto& s : mark.statements)
        if (s.kind == StatementKind::Opaque) {
            opaque = true;
            EXPECT_TRUE(s.defs.empty());
            EXPECT_TRUE(s.uses.contains((VarRef{VarScope::Param, "v", {}})));
            EXPECT_TRUE(s.uses.contains(local("mixed")));
        }
    EXPECT_TRUE(opaque);
}

TEST(DefUseTable, DoublerBalanceIsDefinedAndUsed)
{
    auto models = lower(load_fixture("doubler"));
    auto table = def_use_table(only_function(models, "Doubler", "enter"));
    const auto& balance = table.at(state("balance"));
    EXPECT_GE(balance.defs.size(), 1u);
    EXPECT_GE(balance.uses.size(), 1u);
    EXPECT_TRUE(std::is_sorted(balance.defs.begin(), balance.defs.end()));
    EXPECT_TRUE(std::is_sorted(balance.uses.begin(), balance.uses.end()));
}

TEST(DefUseTable, OnlySenderHasOneEntryWithoutDefs)
{
    auto models = lower(load_fixture("only_sender"));
    auto table = def_use_table(only_function(models, "Greeter", "greet"));
    ASSERT_EQ(table.size(), 1u);
    EXPECT_EQ(table.begin()->first, VarRef::builtin(kMsgSender));
    EXPECT_TRUE(table.begin()->second.defs.empty());
}

/// Invariants over every fixture: key set equals the union of def/use sets,
/// builtins never appear in defs, builtins are exactly the two sources, and
/// every variable name occurs in the function's source text.
TEST(Lower, InvariantsHoldOnEveryFixture)
{
    for (const auto& name : testing::fixture_names()) {
        SourceUnit unit = load_fixture(name);
        auto models = lower(unit);
        for (const auto& c : models) {
            std::set<std::string> state_names;
            for (const auto& v : c.state_vars)
                EXPECT_TRUE(state_names.insert(v.name).second) << name << " duplicate state var " << v.name;
            for (const auto& f : c.functions) {
                SCOPED_TRACE(name + ":" + f.qualified_id());
                EXPECT_EQ(f.contract, c.name);
                if (f.has_body) {
                    const std::string& text = *unit.file_text(f.span.file);
                    EXPECT_LE(static_cast<std::size_t>(f.span.offset) + f.span.length, text.size());
                }
                VarSet all;
                for (const auto& s : f.statements) {
                    for (const auto& d : s.defs)
                        EXPECT_NE(d.scope, VarScope::Builtin);
                    for (const auto* set : {&s.defs, &s.uses})
                        for (const auto& v : *set) {
                            all.insert(v);
                            if (v.scope == VarScope::Builtin) {
                                EXPECT_TRUE(v.name == kMsgSender || v.name == kMsgValue) << v.name;
                            }
                        }
                }
                auto table = def_use_table(f);
                VarSet keys;
                for (const auto& [k, _] : table)
                    keys.insert(k);
                EXPECT_EQ(keys, all);
            }
        }
    }
}

TEST(Lower, WrittenNamesAppearInTheFunctionText)
{
    for (const auto& name : testing::fixture_names()) {
        SourceUnit unit = load_fixture(name);
        for (const auto& c : lower(unit))
            for (const auto& f : c.functions)
                for (const auto& s : f.statements)
                    for (const auto& d : s.defs) {
                        const std::string& file = *unit.file_text(s.span.file);
                        std::string text = file.substr(s.span.offset, s.span.length);
                        if (text.find(d.name) != std::string::npos)
                            continue;
                        // A modifier argument is bound at the invocation, so the
                        // modifier must declare the parameter.
                        std::smatch call;
                        ASSERT_TRUE(std::regex_search(text, call, std::regex(R"(^(\w+)\()")))
                            << name << ":" << f.qualified_id() << " " << d.name << " not in '" << text << "'";
                        std::regex decl("modifier\\s+" + call[1].str() + "\\s*\\([^)]*\\b" + d.name + "\\b");
                        EXPECT_TRUE(std::regex_search(file, decl)) << name << ":" << f.qualified_id() << " " << d.name;
                    }
    }
}

TEST(Lower, MissingAstIsMalformed)
{
    auto unit = make_source_unit("x", "x.sol", "x.sol", "contract X {}");
    try {
        lower(unit);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MalformedAst);
    }
}

TEST(ModelJson, DumpListsContractsAndStatements)
{
    auto j = to_json(lower(load_fixture("doubler")));
    ASSERT_EQ(j["contracts"].size(), 1u);
    EXPECT_EQ(j["contracts"][0]["name"], "Doubler");
    EXPECT_EQ(j["contracts"][0]["functions"][0]["statements"].size(), 12u);
    EXPECT_EQ(j["contracts"][0]["functions"][0]["statements"][9]["kind"], "value_transfer");
}

}  // namespace
}  // namespace ponzilens
