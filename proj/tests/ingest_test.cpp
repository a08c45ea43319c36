#include "support.hpp"

#include "ponzilens/error.hpp"
#include "ponzilens/semver.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <regex>

namespace ponzilens {
namespace {

using testing::fixture;
using testing::load_fixture;
using testing::read_file;
using testing::TempDir;

std::size_t count_nodes(const nlohmann::json& j, const std::string& type)
{
    std::size_t n = 0;
    if (j.is_object()) {
        if (j.value("nodeType", "") == type)
            ++n;
        for (const auto& [_, v] : j.items())
            n += count_nodes(v, type);
    } else if (j.is_array()) {
        for (const auto& v : j)
            n += count_nodes(v, type);
    }
    return n;
}

/// Writes an executable that behaves like `solc --version` / `--standard-json`,
/// replying with `reply` regardless of input.
std::filesystem::path fake_compiler(const TempDir& dir, const std::string& version, const std::string& reply)
{
    auto reply_path = dir.path() / ("reply-" + version + ".json");
    std::ofstream(reply_path) << reply;
    auto exe = dir.path() / ("solc-" + version);
    std::ofstream(exe) << "#!/bin/sh\n"
                          "if [ \"$1\" = \"--version\" ]; then echo 'solc, the solidity compiler'; echo 'Version: "
                       << version << "+commit.deadbeef.Linux.g++'; exit 0; fi\n"
                       << "cat > /dev/null\ncat '" << reply_path.string() << "'\n";
    std::filesystem::permissions(exe, std::filesystem::perms::owner_all);
    return exe;
}

TEST(Semver, ParsesCompilerVersionStrings)
{
    EXPECT_EQ(Version::parse("0.8.23"), (Version{0, 8, 23}));
    EXPECT_EQ(Version::parse("v0.4.26+commit.4563c3fc"), (Version{0, 4, 26}));
    EXPECT_FALSE(Version::parse("eight").has_value());
}

TEST(Semver, ConstraintForms)
{
    auto caret = VersionConstraint::parse("^0.4.11");
    EXPECT_TRUE(caret.satisfied_by({0, 4, 11}));
    EXPECT_TRUE(caret.satisfied_by({0, 4, 26}));
    EXPECT_FALSE(caret.satisfied_by({0, 5, 0}));
    EXPECT_FALSE(caret.satisfied_by({0, 4, 10}));

    auto range = VersionConstraint::parse(">=0.5.0 <0.7.0");
    EXPECT_TRUE(range.satisfied_by({0, 6, 12}));
    EXPECT_FALSE(range.satisfied_by({0, 7, 0}));

    auto pinned = VersionConstraint::parse("0.4.24");
    ASSERT_TRUE(pinned.exact().has_value());
    EXPECT_EQ(*pinned.exact(), (Version{0, 4, 24}));

    auto alt = VersionConstraint::parse("^0.4.0 || ^0.8.0");
    EXPECT_TRUE(alt.satisfied_by({0, 8, 1}));
    EXPECT_FALSE(alt.satisfied_by({0, 6, 0}));
}

TEST(Semver, SupportedReleaseTableIsBoundedAndSorted)
{
    const auto& r = supported_releases();
    ASSERT_FALSE(r.empty());
    EXPECT_EQ(r.front(), kMinSupportedVersion);
    EXPECT_EQ(r.back(), kMaxSupportedVersion);
    EXPECT_TRUE(std::is_sorted(r.begin(), r.end()));
}

TEST(SourceUnit, RecordsPragmaAndFlagsUnsupportedVersions)
{
    auto ok = make_source_unit("a", "a.sol", "a.sol", "pragma solidity ^0.4.11;\ncontract A {}\n");
    ASSERT_TRUE(ok.pragma.has_value());
    EXPECT_EQ(*ok.pragma, "^0.4.11");
    EXPECT_FALSE(ok.unsupported);

    auto old = make_source_unit("b", "b.sol", "b.sol", "pragma solidity ^0.3.6;\ncontract B {}\n");
    EXPECT_TRUE(old.unsupported);

    auto future = make_source_unit("c", "c.sol", "c.sol", "pragma solidity >=0.9.0;\ncontract C {}\n");
    EXPECT_TRUE(future.unsupported);

    auto none = make_source_unit("d", "d.sol", "d.sol", "contract D {}\n");
    EXPECT_FALSE(none.pragma.has_value());
    EXPECT_FALSE(none.unsupported);
}

TEST(LoadAst, DoublerFixtureHasOneContractAndOneFunction)
{
    SourceUnit unit = load_fixture("doubler");
    ASSERT_TRUE(unit.ast_json.has_value());
    EXPECT_EQ(count_nodes(*unit.ast_json, "ContractDefinition"), 1u);
    EXPECT_EQ(count_nodes(*unit.ast_json, "FunctionDefinition"), 1u);
    EXPECT_NE(unit.source_text().find("function enter()"), std::string::npos);
}

TEST(LoadAst, ContractCountMatchesTextScanOnEveryFixture)
{
    static const std::regex decl(R"((^|\n)\s*(abstract\s+)?(contract|interface|library)\s+\w+)");
    for (const auto& name : testing::fixture_names()) {
        SourceUnit unit = load_fixture(name);
        std::string text = read_file(fixture(name + ".sol"));
        auto expected = static_cast<std::size_t>(std::distance(std::sregex_iterator(text.begin(), text.end(), decl), std::sregex_iterator()));
        EXPECT_EQ(count_nodes(*unit.ast_json, "ContractDefinition"), expected) << name;
    }
}

TEST(LoadAst, EmptyObjectIsMalformed)
{
    try {
        load_ast("{}");
        FAIL() << "expected MalformedAst";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MalformedAst);
    }
}

TEST(LoadAst, InvalidJsonIsJsonError)
{
    try {
        load_ast("{\"sources\": ");
        FAIL() << "expected JsonError";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::JsonError);
    }
}

TEST(LoadAst, UnknownNodeKindBecomesOpaqueStatement)
{
    SourceUnit unit = read_source_path(fixture("unknown_kind.ast.json"), nullptr);
    auto models = lower(unit);
    ASSERT_EQ(models.size(), 1u);
    const FunctionModel* report = models[0].find_function("report");
    ASSERT_NE(report, nullptr);
    ASSERT_EQ(report->statements.size(), 2u);
    EXPECT_EQ(report->statements[0].kind, StatementKind::Opaque);
    EXPECT_TRUE(report->statements[0].defs.empty());
}

TEST(LoadAst, RoundTripPreservesCounts)
{
    for (const auto& name : testing::fixture_names()) {
        SourceUnit unit = load_fixture(name);
        SourceUnit again = load_ast(to_ast_document(unit).dump());
        auto a = lower(unit);
        auto b = lower(again);
        ASSERT_EQ(a.size(), b.size()) << name;
        for (std::size_t i = 0; i < a.size(); ++i) {
            EXPECT_EQ(a[i].functions.size(), b[i].functions.size()) << name;
            EXPECT_EQ(a[i].state_vars.size(), b[i].state_vars.size()) << name;
        }
        EXPECT_EQ(again.source_text(), unit.source_text()) << name;
    }
}

TEST(Compile, EmptySourceIsCompileError)
{
    auto unit = make_source_unit("empty", "empty.sol", "empty.sol", "");
    try {
        compile_source(unit, CompilerSelector{});
        FAIL() << "expected CompileError";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::CompileError);
    }
}

TEST(Compile, UnsupportedPragmaIsRejectedBeforeResolution)
{
    auto unit = make_source_unit("old", "old.sol", "old.sol", "pragma solidity ^0.3.0;\ncontract A {}\n");
    try {
        compile_source(unit, CompilerSelector{});
        FAIL() << "expected UnsupportedVersion";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnsupportedVersion);
    }
}

TEST(Compile, NoMatchingCompilerIsCompilerNotFound)
{
    CompilerSelector selector;
    selector.add({{0, 8, 19}, "/nonexistent/solc"});
    auto unit = make_source_unit("a", "a.sol", "a.sol", "pragma solidity ^0.4.11;\ncontract A {}\n");
    try {
        compile_source(unit, selector);
        FAIL() << "expected CompilerNotFound";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::CompilerNotFound);
    }
}

TEST(Compile, ResolutionPrefersExactPinThenHighestCompatible)
{
    CompilerSelector selector;
    selector.add({{0, 4, 24}, "a"});
    selector.add({{0, 4, 26}, "b"});
    selector.add({{0, 8, 23}, "c"});
    EXPECT_EQ(selector.resolve(VersionConstraint::parse("0.4.24"))->executable, "a");
    EXPECT_EQ(selector.resolve(VersionConstraint::parse("^0.4.11"))->executable, "b");
    EXPECT_EQ(selector.resolve(VersionConstraint::parse(">=0.5.0"))->executable, "c");
    EXPECT_FALSE(selector.resolve(VersionConstraint::parse("^0.6.0")).has_value());
}

TEST(Compile, RunsCompilerAndRecordsVersion)
{
    TempDir dir("compile");
    auto exe = fake_compiler(dir, "0.8.19", read_file(fixture("two_contracts.ast.json")));
    CompilerSelector selector;
    ASSERT_TRUE(selector.add_executable(exe));
    auto unit = make_source_unit("two", "two_contracts.sol", "two_contracts.sol", read_file(fixture("two_contracts.sol")));
    SourceUnit compiled = compile_source(unit, selector);
    ASSERT_TRUE(compiled.ast_json.has_value());
    EXPECT_EQ(count_nodes(*compiled.ast_json, "ContractDefinition"), 2u);
    EXPECT_EQ(compiled.compiler_version, "0.8.19");
    EXPECT_EQ(compiled.source_text(), unit.source_text());
}

TEST(Compile, DiagnosticsAreCapturedVerbatim)
{
    TempDir dir("compile-error");
    const std::string message = "ParserError: Expected ';' but got '}'\n --> bad.sol:3:1:";
    nlohmann::json reply = {{"errors", {{{"severity", "error"}, {"formattedMessage", message}, {"message", "Expected ';'"}}}}};
    auto exe = fake_compiler(dir, "0.8.19", reply.dump());
    CompilerSelector selector;
    ASSERT_TRUE(selector.add_executable(exe));
    auto unit = make_source_unit("bad", "bad.sol", "bad.sol", "pragma solidity ^0.8.0;\ncontract A { uint x }\n");
    try {
        compile_source(unit, selector);
        FAIL() << "expected CompileError";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::CompileError);
        EXPECT_NE(std::string(e.what()).find(message), std::string::npos);
    }
}

TEST(Compile, RealCompilerWhenConfigured)
{
    CompilerSelector selector = CompilerSelector::from_environment();
    if (selector.binaries().empty())
        GTEST_SKIP() << "no Solidity compiler configured (PONZILENS_SOLC)";
    auto unit = make_source_unit("two", "two_contracts.sol", "two_contracts.sol", read_file(fixture("two_contracts.sol")));
    SourceUnit compiled = compile_source(unit, selector);
    EXPECT_EQ(count_nodes(*compiled.ast_json, "ContractDefinition"), 2u);
}

TEST(Fetch, MalformedAddressFailsBeforeAnyRequest)
{
    FetchConfig cfg;
    cfg.api_base_url = "http://127.0.0.1:1/api";
    cfg.api_key = "k";
    std::string short_address = "0xa8b9e7718c73329AFd7B99F089C853a80B8127B";
    ASSERT_EQ(short_address.size(), 41u);
    try {
        fetch_verified_source(short_address, cfg);
        FAIL() << "expected InvalidAddress";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidAddress);
    }
}

TEST(Fetch, ConfigValidation)
{
    FetchConfig cfg;
    cfg.rate_limit = 0;
    EXPECT_THROW(cfg.validate(), Error);
    cfg.rate_limit = 1;
    cfg.timeout = -1;
    EXPECT_THROW(cfg.validate(), Error);
}

TEST(Fetch, LiveExplorerWhenKeyIsSet)
{
    const char* key = std::getenv("PONZILENS_ETHERSCAN_KEY");
    if (key == nullptr || *key == '\0' || std::getenv("PONZILENS_ONLINE_TESTS") == nullptr)
        GTEST_SKIP() << "offline";
    FetchConfig cfg;
    SourceUnit unit = fetch_verified_source("0xa8b9e7718c73329AFd7B99F089C853a80B8127Be", cfg);
    EXPECT_FALSE(unit.source_text().empty());
}

}  // namespace
}  // namespace ponzilens
