#include "ponzilens/detect.hpp"
#include "ponzilens/error.hpp"
#include "ponzilens/eval.hpp"
#include "ponzilens/ingest.hpp"
#include "ponzilens/pipeline.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace ponzilens;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPositive = 1;
constexpr int kExitUsage = 2;
constexpr int kExitPipeline = 3;

/// Failure that maps straight to an exit status.
struct ExitError
{
    int code;
    std::string message;
};

struct StaticFlags
{
    bool no_ctor = false;
    bool implicit_flow = false;
    bool cluster = false;

    [[nodiscard]] StaticOptions options() const
    {
        StaticOptions o;
        o.slice.include_constructors = !no_ctor;
        o.build.implicit_flow = implicit_flow;
        o.render.cluster = cluster;
        return o;
    }
};

struct LlmFlags
{
    std::string backend = "mock";
    std::string model;
    std::string endpoint;
    std::string mode = "full";
    int repeats = 5;
    std::string template_dir = TemplateSet::default_dir().string();
    std::string definition;
    double price_in = 0.0;
    double price_out = 0.0;
    int max_tokens = 1024;
    std::size_t context_window = 16385;
    int retries = 3;
    double timeout = 120.0;
    int concurrency = 1;
};

struct Options
{
    std::string out = ".";
    bool json = false;
    bool gate = false;
    std::string dump_ir;
    std::string dump_graph;
    std::string emit_slices;
    StaticFlags statics;
    LlmFlags llm;
};

void add_static_flags(CLI::App* cmd, StaticFlags& f)
{
    cmd->add_flag("--no-ctor", f.no_ctor, "Do not add constructors of contracts with tainted state to the slice");
    cmd->add_flag("--implicit-flow", f.implicit_flow, "Add flow from branch and loop conditions into guarded definitions");
    cmd->add_flag("--cluster", f.cluster, "Group each function's variables into a DOT cluster");
}

void add_llm_flags(CLI::App* cmd, LlmFlags& f)
{
    cmd->add_option("--backend", f.backend, "Chat-completion backend: openai, local or mock")
        ->check(CLI::IsMember({"openai", "openai_compatible", "local", "local_server", "mock"}))
        ->capture_default_str();
    cmd->add_option("--model", f.model, "Model name (default: gpt-3.5-turbo for openai, local-model for local, mock for mock)");
    cmd->add_option("--endpoint", f.endpoint, "Chat-completion URL (default depends on --backend)");
    cmd->add_option("--mode", f.mode, "Prompt content: full, no-taint or raw")
        ->check(CLI::IsMember({"full", "no-taint", "no_taint", "raw"}))
        ->capture_default_str();
    cmd->add_option("--repeats", f.repeats, "Runs per contract; the verdict is their majority")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--template-dir", f.template_dir, "Directory with the prompt templates")->capture_default_str();
    cmd->add_option("--definition", f.definition, "File with a custom Ponzi definition (default: from the template directory)");
    cmd->add_option("--price-in", f.price_in, "Price per 1k input tokens")->capture_default_str();
    cmd->add_option("--price-out", f.price_out, "Price per 1k output tokens")->capture_default_str();
    cmd->add_option("--max-tokens", f.max_tokens, "Maximum output tokens per completion")->capture_default_str();
    cmd->add_option("--context-window", f.context_window, "Model context window in tokens")->capture_default_str();
    cmd->add_option("--retries", f.retries, "Attempts per request on transient failures")->capture_default_str();
    cmd->add_option("--timeout", f.timeout, "Request timeout in seconds")->capture_default_str();
}

std::string read_text(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw ExitError{kExitUsage, "cannot read " + p.string()};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& p, const std::string& text)
{
    if (p.has_parent_path())
        fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out)
        throw ExitError{kExitPipeline, "cannot write " + p.string()};
    out << text;
}

void require_file(const std::string& path)
{
    if (!fs::is_regular_file(path))
        throw ExitError{kExitUsage, "no such file: " + path};
}

std::string unit_name(const std::string& path)
{
    std::string name = fs::path(path).filename().string();
    for (std::string_view ext : {".ast.json", ".json", ".sol"})
        if (name.size() > ext.size() && name.ends_with(ext))
            return name.substr(0, name.size() - ext.size());
    return name;
}

DetectConfig detect_config(const LlmFlags& f, const StaticFlags& s, const CompilerSelector* compilers)
{
    DetectConfig cfg;
    cfg.llm.backend = *parse_backend(f.backend);
    cfg.llm.endpoint = f.endpoint;
    cfg.llm.model = !f.model.empty() ? f.model
                    : cfg.llm.backend == BackendKind::OpenAiCompatible ? "gpt-3.5-turbo"
                    : cfg.llm.backend == BackendKind::LocalServer      ? "local-model"
                                                                        : "mock";
    cfg.llm.price_in_per_1k = f.price_in;
    cfg.llm.price_out_per_1k = f.price_out;
    cfg.llm.max_output_tokens = f.max_tokens;
    cfg.llm.context_window = f.context_window;
    cfg.llm.retry.max_attempts = f.retries;
    cfg.llm.timeout_seconds = f.timeout;
    cfg.llm.concurrency_limit = f.concurrency;
    cfg.llm.apply_environment();
    try {
        cfg.llm.validate();
    } catch (const Error& e) {
        throw ExitError{kExitUsage, e.what()};
    }
    cfg.mode = *parse_mode(f.mode);
    cfg.repeats = f.repeats;
    try {
        cfg.templates = TemplateSet::load(f.template_dir);
    } catch (const Error& e) {
        throw ExitError{kExitUsage, e.what()};
    }
    if (!f.definition.empty())
        cfg.ponzi_definition = read_text(f.definition);
    cfg.static_options = s.options();
    cfg.compilers = compilers;
    return cfg;
}

int cmd_analyze(const std::string& path, const Options& o, const CompilerSelector& compilers)
{
    require_file(path);
    SourceUnit unit = ingest(unit_name(path), path, &compilers, nullptr);
    StaticResult s = run_static(unit, o.statics.options());
    std::string name = unit_name(path);
    fs::path dot_path = fs::path(o.out) / (name + ".taint.dot");
    write_text(dot_path, s.dot.text);
    if (!o.dump_ir.empty())
        write_text(o.dump_ir, to_json(s.models).dump(2) + "\n");
    if (!o.dump_graph.empty())
        write_text(o.dump_graph, to_json(s.graph).dump(2) + "\n");
    if (!o.emit_slices.empty()) {
        fs::path dir = o.emit_slices;
        for (const auto& [id, text] : s.slices.per_function)
            write_text(dir / (id + ".sol"), text + "\n");
        write_text(dir / "combined.sol", s.slices.combined_text + (s.slices.combined_text.empty() ? "" : "\n"));
        write_text(dir / "header.sol", s.slices.header);
    }

    std::vector<std::string> tainted;
    for (NodeId n : tainted_state_vars(s.taint, s.graph))
        tainted.push_back(s.graph.path_string(n));
    std::size_t source_bytes = 0;
    for (const auto& f : unit.files)
        source_bytes += f.text.size();

    if (o.json) {
        nlohmann::json j = {{"contract", name},
                            {"functions_total", s.slices.stats.functions_total},
                            {"functions_selected", s.slices.stats.selected},
                            {"selected", s.slices.selected},
                            {"tainted_state_vars", tainted},
                            {"slice_bytes", s.slices.stats.bytes},
                            {"source_bytes", source_bytes},
                            {"dot_nodes", s.dot.node_count},
                            {"dot_edges", s.dot.edge_count},
                            {"dot", dot_path.string()}};
        std::cout << j.dump(2) << "\n";
        return kExitOk;
    }
    std::cout << "functions: " << s.slices.stats.functions_total << "\n";
    std::cout << "selected: " << s.slices.stats.selected << "\n";
    for (const auto& id : s.slices.selected)
        std::cout << "  " << id << "\n";
    std::cout << "tainted state variables:";
    for (const auto& t : tainted)
        std::cout << " " << t;
    std::cout << "\n";
    std::cout << "slice bytes: " << s.slices.stats.bytes << " of " << source_bytes << "\n";
    std::cout << "taint graph: " << dot_path.string() << " (" << s.dot.node_count << " nodes, " << s.dot.edge_count << " edges)\n";
    return kExitOk;
}

int cmd_graph(const std::string& path, const Options& o, const CompilerSelector& compilers)
{
    require_file(path);
    SourceUnit unit = ingest(unit_name(path), path, &compilers, nullptr);
    StaticResult s = run_static(unit, o.statics.options());
    if (!o.dump_graph.empty())
        write_text(o.dump_graph, to_json(s.graph).dump(2) + "\n");
    if (o.json) {
        std::cout << nlohmann::json{{"contract", unit_name(path)},
                                    {"nodes", s.dot.node_count},
                                    {"edges", s.dot.edge_count},
                                    {"dot", s.dot.text}}.dump(2)
                  << "\n";
    } else {
        std::cout << s.dot.text;
    }
    return kExitOk;
}

int cmd_detect(const std::string& path, const Options& o, const CompilerSelector& compilers)
{
    require_file(path);
    DetectConfig cfg = detect_config(o.llm, o.statics, &compilers);
    std::string name = unit_name(path);
    DetectionReport r = detect_contract(name, path, cfg);
    fs::path report_path = fs::path(o.out) / (name + ".report.json");
    write_text(report_path, r.to_json().dump(2) + "\n");

    if (o.json) {
        nlohmann::json j = r.to_json();
        j["report_path"] = report_path.string();
        std::cout << j.dump(2) << "\n";
    }
    if (r.error) {
        std::cerr << "error in phase " << r.error->phase << " (" << r.error->code << "): " << r.error->message << "\n";
        return kExitPipeline;
    }
    if (!r.final_verdict) {
        std::cerr << "no run produced a parseable verdict\n";
        return kExitPipeline;
    }
    if (!o.json) {
        std::cout << (*r.final_verdict ? "true" : "false") << "\n";
        std::cout << "report: " << report_path.string() << "\n";
    }
    return o.gate && *r.final_verdict ? kExitPositive : kExitOk;
}

nlohmann::json metrics_json(const DatasetManifest& manifest, const std::vector<DetectionReport>& reports)
{
    MetricsSummary m = compute_metrics(manifest, reports);
    auto per_run = compute_run_metrics(manifest, reports);
    Rates mean = mean_rates(per_run);
    auto ratio = [](double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& r : per_run)
        runs.push_back(r.to_json());
    nlohmann::json j = m.to_json();
    j["manifest"] = manifest.name;
    j["per_run"] = std::move(runs);
    j["per_run_mean"] = {{"tpr", ratio(mean.tpr)}, {"tnr", ratio(mean.tnr)}, {"fpr", ratio(mean.fpr)},
                         {"fnr", ratio(mean.fnr)}, {"bac", ratio(mean.bac)}};
    return j;
}

std::string percent(double v)
{
    if (std::isnan(v))
        return "n/a";
    std::ostringstream ss;
    ss.setf(std::ios::fixed);
    ss.precision(2);
    ss << v * 100.0 << "%";
    return ss.str();
}

void print_metrics(const nlohmann::json& j)
{
    auto get = [&](const char* k) { return j[k].is_null() ? std::nan("") : j[k].get<double>(); };
    std::cout << "TP " << j["tp"] << "  TN " << j["tn"] << "  FP " << j["fp"] << "  FN " << j["fn"] << "  unparseable "
              << j["unparseable"] << "  errors " << j["errors"] << "\n";
    std::cout << "TPR " << percent(get("tpr")) << "  TNR " << percent(get("tnr")) << "  FNR " << percent(get("fnr"))
              << "  FPR " << percent(get("fpr")) << "  BAC " << percent(get("bac")) << "\n";
}

int cmd_batch(const std::string& manifest_path, const Options& o, const std::string& journal_override, bool fresh,
              const CompilerSelector& compilers)
{
    require_file(manifest_path);
    DatasetManifest manifest;
    try {
        manifest = load_manifest(manifest_path);
    } catch (const Error& e) {
        throw ExitError{kExitUsage, e.what()};
    }
    LlmFlags flags = o.llm;
    DetectConfig cfg = detect_config(flags, o.statics, &compilers);
    fs::path out = o.out;
    fs::create_directories(out);

    BatchOptions b;
    b.concurrency = o.llm.concurrency;
    b.journal = journal_override.empty() ? out / "journal.jsonl" : fs::path(journal_override);
    if (fresh)
        fs::remove(*b.journal);
    if (!o.json)
        b.on_report = [](const DetectionReport& r, std::size_t done, std::size_t total) {
            std::cerr << "[" << done << "/" << total << "] " << r.contract_id << ": "
                      << (r.error ? "error (" + r.error->phase + ")" : r.final_verdict ? (*r.final_verdict ? "true" : "false") : "unparseable")
                      << "\n";
        };
    std::vector<DetectionReport> reports = run_batch(manifest, cfg, b);
    write_reports(out / "reports.jsonl", reports);
    nlohmann::json metrics = metrics_json(manifest, reports);
    OverheadStats overhead = aggregate_overhead(reports);
    write_text(out / "metrics.json", metrics.dump(2) + "\n");
    write_text(out / "overhead.json", overhead.to_json().dump(2) + "\n");

    if (o.json) {
        std::cout << nlohmann::json{{"reports", reports.size()},
                                    {"reports_path", (out / "reports.jsonl").string()},
                                    {"metrics", metrics},
                                    {"overhead", overhead.to_json()}}.dump(2)
                  << "\n";
    } else {
        std::cout << "reports: " << reports.size() << " written to " << (out / "reports.jsonl").string() << "\n";
        print_metrics(metrics);
        std::cout << "mean time " << overhead.mean_seconds << " s (std " << overhead.std_seconds << "), mean tokens "
                  << overhead.mean_tokens << ", mean cost " << overhead.mean_cost << "\n";
    }
    return kExitOk;
}

int cmd_metrics(const std::string& reports_path, const std::string& manifest_path, const Options& o)
{
    require_file(reports_path);
    require_file(manifest_path);
    DatasetManifest manifest;
    try {
        manifest = load_manifest(manifest_path);
    } catch (const Error& e) {
        throw ExitError{kExitUsage, e.what()};
    }
    std::vector<DetectionReport> reports = read_reports(reports_path);
    nlohmann::json metrics = metrics_json(manifest, reports);
    if (o.json) {
        metrics["overhead"] = aggregate_overhead(reports).to_json();
        std::cout << metrics.dump(2) << "\n";
    } else {
        print_metrics(metrics);
    }
    return kExitOk;
}

int cmd_fetch(const std::string& address, const Options& o, FetchConfig cfg)
{
    if (!is_valid_address(address))
        throw ExitError{kExitUsage, "not a 20-byte hex address: " + address};
    try {
        cfg.validate();
    } catch (const Error& e) {
        throw ExitError{kExitUsage, e.what()};
    }
    SourceUnit unit = fetch_verified_source(address, cfg);
    fs::path path = fs::path(o.out) / (address + ".sol");
    write_text(path, unit.source_text());
    if (o.json)
        std::cout << nlohmann::json{{"address", address}, {"path", path.string()}, {"bytes", unit.source_text().size()},
                                    {"pragma", unit.pragma ? nlohmann::json(*unit.pragma) : nlohmann::json(nullptr)}}.dump(2)
                  << "\n";
    else
        std::cout << path.string() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Ponzi-scheme detection for Solidity contracts: taint analysis, slicing and LLM review"};
    app.require_subcommand(1);
    Options o;
    std::string target;
    std::string manifest;
    std::string journal;
    bool fresh = false;
    FetchConfig fetch_cfg;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
        cmd->add_flag("--json", o.json, "Machine-readable output on stdout");
    };

    auto* analyze = app.add_subcommand("analyze", "Taint analysis and slicing; writes <name>.taint.dot");
    analyze->add_option("path", target, "Solidity file or compiler AST (.ast.json)")->required();
    add_common(analyze);
    add_static_flags(analyze, o.statics);
    analyze->add_option("--dump-ir", o.dump_ir, "Write the lowered contract model as JSON to this file");
    analyze->add_option("--dump-graph", o.dump_graph, "Write the hypernode graph as JSON to this file");
    analyze->add_option("--emit-slices", o.emit_slices, "Write per-function and combined slices into this directory");

    auto* detect = app.add_subcommand("detect", "Full pipeline with LLM review; prints true or false");
    detect->add_option("path", target, "Solidity file or compiler AST (.ast.json)")->required();
    add_common(detect);
    add_static_flags(detect, o.statics);
    add_llm_flags(detect, o.llm);
    detect->add_flag("--gate", o.gate, "Exit with status 1 when the verdict is true");

    auto* batch = app.add_subcommand("batch", "Detect every contract of a labelled manifest");
    batch->add_option("manifest", manifest, "CSV or line-JSON manifest: id,path_or_address,label")->required();
    add_common(batch);
    add_static_flags(batch, o.statics);
    add_llm_flags(batch, o.llm);
    batch->add_option("--concurrency", o.llm.concurrency, "Contracts processed in parallel")->check(CLI::PositiveNumber)->capture_default_str();
    batch->add_option("--journal", journal, "Journal file for resuming (default: <out>/journal.jsonl)");
    batch->add_flag("--fresh", fresh, "Discard an existing journal before starting");

    auto* metrics = app.add_subcommand("metrics", "Recompute metrics from a reports file");
    std::string reports_path;
    metrics->add_option("reports", reports_path, "reports.jsonl written by batch")->required();
    metrics->add_option("manifest", manifest, "Manifest with the labels")->required();
    metrics->add_flag("--json", o.json, "Machine-readable output on stdout");

    auto* graph = app.add_subcommand("graph", "Print the taint graph as DOT");
    graph->add_option("path", target, "Solidity file or compiler AST (.ast.json)")->required();
    graph->add_flag("--json", o.json, "Machine-readable output on stdout");
    add_static_flags(graph, o.statics);
    graph->add_option("--dump-graph", o.dump_graph, "Write the hypernode graph as JSON to this file");

    auto* fetch = app.add_subcommand("fetch", "Download verified source from a block explorer");
    fetch->add_option("address", target, "Contract address (0x followed by 40 hex digits)")->required();
    add_common(fetch);
    fetch->add_option("--api-url", fetch_cfg.api_base_url, "Explorer API base URL")->capture_default_str();
    fetch->add_option("--api-key", fetch_cfg.api_key, "Explorer API key (PONZILENS_ETHERSCAN_KEY overrides)");
    fetch->add_option("--rate-limit", fetch_cfg.rate_limit, "Requests per second")->capture_default_str();
    fetch->add_option("--timeout", fetch_cfg.timeout, "Request timeout in seconds")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        CompilerSelector compilers = CompilerSelector::from_environment();
        if (analyze->parsed())
            return cmd_analyze(target, o, compilers);
        if (detect->parsed())
            return cmd_detect(target, o, compilers);
        if (batch->parsed())
            return cmd_batch(manifest, o, journal, fresh, compilers);
        if (metrics->parsed())
            return cmd_metrics(reports_path, manifest, o);
        if (graph->parsed())
            return cmd_graph(target, o, compilers);
        if (fetch->parsed())
            return cmd_fetch(target, o, fetch_cfg);
    } catch (const ExitError& e) {
        std::cerr << "ponzilens: " << e.message << "\n";
        return e.code;
    } catch (const PhaseError& e) {
        std::cerr << "ponzilens: " << to_string(e.phase()) << " failed (" << to_string(e.code()) << "): " << e.what() << "\n";
        return kExitPipeline;
    } catch (const Error& e) {
        std::cerr << "ponzilens: " << to_string(e.code()) << ": " << e.what() << "\n";
        return kExitPipeline;
    } catch (const std::exception& e) {
        std::cerr << "ponzilens: " << e.what() << "\n";
        return kExitPipeline;
    }
    return kExitUsage;
}
