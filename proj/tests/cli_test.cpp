#include "support.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sys/wait.h>

namespace ponzilens {
namespace {

using testing::fixture;
using testing::read_file;
using testing::TempDir;

struct Result
{
    int code = -1;
    std::string out;
    std::string err;
};

std::string quote(const std::string& s)
{
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    }
    return out + "'";
}

Result run(const std::vector<std::string>& args, const std::string& env = "")
{
    static TempDir scratch("cli-stderr");
    auto err_path = scratch.path() / "stderr.txt";
    std::string cmd = env + " " + quote(PONZILENS_CLI);
    for (const auto& a : args)
        cmd += " " + quote(a);
    cmd += " 2>" + quote(err_path.string());
    Result r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr)
        throw std::runtime_error("popen failed");
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0)
        r.out.append(buf, n);
    int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = read_file(err_path);
    return r;
}

std::string ast(const std::string& name)
{
    return fixture(name + ".ast.json").string();
}

TEST(Cli, AnalyzeWritesDotAndPrintsStats)
{
    TempDir out("cli-analyze");
    auto r = run({"analyze", ast("doubler"), "--out", out.path().string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("functions: 1"), std::string::npos);
    EXPECT_NE(r.out.find("selected: 1"), std::string::npos);
    EXPECT_NE(r.out.find("Doubler.balance"), std::string::npos);
    EXPECT_EQ(read_file(out.path() / "doubler.taint.dot"), read_file(std::filesystem::path(PONZILENS_GOLDEN_DIR) / "doubler.taint.dot"));
}

TEST(Cli, AnalyzeEmptyContract)
{
    TempDir out("cli-empty");
    auto r = run({"analyze", ast("empty"), "--out", out.path().string(), "--json"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["functions_selected"], 0);
    EXPECT_EQ(j["dot_edges"], 0);
    EXPECT_EQ(read_file(out.path() / "empty.taint.dot"), "digraph taint {\n}\n");
}

TEST(Cli, AnalyzeDumpsAndSlices)
{
    TempDir out("cli-dumps");
    auto r = run({"analyze", ast("features"), "--out", out.path().string(), "--dump-ir", (out.path() / "ir.json").string(),
                  "--dump-graph", (out.path() / "graph.json").string(), "--emit-slices", (out.path() / "slices").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(nlohmann::json::accept(read_file(out.path() / "ir.json")));
    EXPECT_TRUE(nlohmann::json::accept(read_file(out.path() / "graph.json")));
    EXPECT_TRUE(std::filesystem::exists(out.path() / "slices" / "combined.sol"));
    EXPECT_TRUE(std::filesystem::exists(out.path() / "slices" / "Fund.deposit.sol"));
}

TEST(Cli, MissingFileIsUsageError)
{
    auto r = run({"analyze", "/nonexistent/contract.sol"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("no such file"), std::string::npos);
}

TEST(Cli, CompileFailureIsPipelineError)
{
    TempDir dir("cli-compile");
    std::ofstream(dir.path() / "c.sol") << "pragma solidity ^0.4.11;\ncontract C {}\n";
    auto r = run({"analyze", (dir.path() / "c.sol").string(), "--out", dir.path().string()}, "PATH=/nonexistent PONZILENS_SOLC=");
    EXPECT_EQ(r.code, 3) << r.err;
}

TEST(Cli, DetectGate)
{
    TempDir out("cli-detect");
    auto positive = run({"detect", ast("doubler"), "--gate", "--out", out.path().string()});
    EXPECT_EQ(positive.code, 1) << positive.err;
    EXPECT_EQ(positive.out.substr(0, 5), "true\n");
    EXPECT_TRUE(std::filesystem::exists(out.path() / "doubler.report.json"));

    auto negative = run({"detect", ast("token"), "--gate", "--out", out.path().string()});
    EXPECT_EQ(negative.code, 0) << negative.err;
    EXPECT_EQ(negative.out.substr(0, 6), "false\n");

    auto no_gate = run({"detect", ast("doubler"), "--out", out.path().string()});
    EXPECT_EQ(no_gate.code, 0);
}

TEST(Cli, DetectJsonMatchesReportFile)
{
    TempDir out("cli-detect-json");
    auto r = run({"detect", ast("doubler"), "--json", "--repeats", "3", "--out", out.path().string()});
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["final_verdict"], true);
    EXPECT_EQ(j["runs"].size(), 3u);
    auto file = nlohmann::json::parse(read_file(out.path() / "doubler.report.json"));
    j.erase("report_path");
    EXPECT_EQ(j, file);
}

TEST(Cli, OpenAiWithoutKeyIsUsageError)
{
    auto r = run({"detect", ast("doubler"), "--backend", "openai"}, "PONZILENS_API_KEY=");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("PONZILENS_API_KEY"), std::string::npos);
}

TEST(Cli, DetectPipelineErrorExitsThree)
{
    TempDir out("cli-detect-error");
    auto r = run({"detect", ast("pure_view"), "--out", out.path().string()});
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("EmptyInput"), std::string::npos);
}

TEST(Cli, BatchAndMetrics)
{
    TempDir dir("cli-batch");
    std::ofstream(dir.path() / "m.csv") << "id,path_or_address,label\n"
                                        << "doubler," << ast("doubler") << ",ponzi\n"
                                        << "token," << ast("token") << ",non_ponzi\n";
    auto b = run({"batch", (dir.path() / "m.csv").string(), "--out", (dir.path() / "out").string(), "--json", "--repeats", "2"});
    ASSERT_EQ(b.code, 0) << b.err;
    auto summary = nlohmann::json::parse(b.out);
    EXPECT_EQ(summary["reports"], 2);

    auto m = run({"metrics", (dir.path() / "out" / "reports.jsonl").string(), (dir.path() / "m.csv").string(), "--json"});
    ASSERT_EQ(m.code, 0) << m.err;
    auto metrics = nlohmann::json::parse(m.out);
    auto manifest = load_manifest(dir.path() / "m.csv");
    auto expected = compute_metrics(manifest, read_reports(dir.path() / "out" / "reports.jsonl"));
    EXPECT_EQ(metrics["bac"].get<double>(), expected.bac);
    EXPECT_EQ(metrics["per_run"].size(), 2u);

    auto text = run({"metrics", (dir.path() / "out" / "reports.jsonl").string(), (dir.path() / "m.csv").string()});
    EXPECT_NE(text.out.find("BAC 100.00%"), std::string::npos) << text.out;

    for (const char* file : {"metrics.json", "overhead.json"})
        EXPECT_TRUE(nlohmann::json::accept(read_file(dir.path() / "out" / file))) << file;
}

TEST(Cli, BatchEmptyManifest)
{
    TempDir dir("cli-batch-empty");
    std::ofstream(dir.path() / "empty.csv") << "id,path_or_address,label\n";
    auto r = run({"batch", (dir.path() / "empty.csv").string(), "--out", dir.path().string()});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(read_file(dir.path() / "reports.jsonl"), "");
}

TEST(Cli, GraphMatchesGolden)
{
    auto r = run({"graph", ast("payout_queue")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, read_file(std::filesystem::path(PONZILENS_GOLDEN_DIR) / "payout_queue.taint.dot"));
    auto j = run({"graph", ast("payout_queue"), "--json"});
    EXPECT_EQ(nlohmann::json::parse(j.out)["dot"], r.out);
}

TEST(Cli, FetchRejectsBadAddress)
{
    auto r = run({"fetch", "0x1234", "--json"});
    EXPECT_EQ(r.code, 2);
}

TEST(Cli, UsageErrors)
{
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"detect", ast("doubler"), "--mode", "sideways"}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
}

TEST(Cli, HelpListsFlags)
{
    auto r = run({"detect", "--help"});
    EXPECT_EQ(r.code, 0);
    for (const char* flag : {"--backend", "--model", "--mode", "--repeats", "--template-dir", "--out", "--json", "--gate"})
        EXPECT_NE(r.out.find(flag), std::string::npos) << flag;
    auto batch = run({"batch", "--help"});
    EXPECT_NE(batch.out.find("--concurrency"), std::string::npos);
}

}  // namespace
}  // namespace ponzilens
