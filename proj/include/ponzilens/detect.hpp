#pragma once

#include "ponzilens/pipeline.hpp"

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ponzilens {

enum class Mode { Full, NoTaint, Raw };
enum class Stage { Analysis, Detection };

std::string_view to_string(Mode mode);
std::string_view to_string(Stage stage);
/// Accepts `full`, `no-taint`, `no_taint` and `raw`.
std::optional<Mode> parse_mode(std::string_view text);

struct PromptParts
{
    std::optional<std::string> code;
    std::optional<std::string> dot;
    std::optional<std::string> prior_analysis;
    std::optional<std::string> ponzi_definition;
};

struct PromptBundle
{
    Stage stage = Stage::Analysis;
    std::string rendered;
    PromptParts parts;
    std::size_t token_estimate = 0;
    std::string template_version;
};

/// Prompt templates and the default definition text, loaded from a directory
/// holding `VERSION`, `analysis.tmpl`, `detection.tmpl`, `ponzi_definition.txt`.
struct TemplateSet
{
    std::string version;
    std::string analysis;
    std::string detection;
    std::string ponzi_definition;

    static TemplateSet load(const std::filesystem::path& dir);
    /// `PONZILENS_TEMPLATE_DIR`, else the directory installed with the build.
    static std::filesystem::path default_dir();
};

/// Substitutes `{{name}}` and keeps `{{#name}}...{{/name}}` sections only
/// when `name` is bound to a non-empty value.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& vars);

/// ceil(bytes / 4).
std::size_t estimate_tokens(std::string_view text);

/// Full and no-taint modes prompt with the declaration header plus the
/// combined slice; raw mode with `raw_source`. Full mode requires `dot`.
PromptBundle build_analysis_prompt(const SliceBundle& bundle, const DotDocument* dot, Mode mode,
                                   const TemplateSet& templates, std::string_view raw_source = {});
PromptBundle build_detection_prompt(std::string_view analysis, std::string_view ponzi_definition,
                                    const TemplateSet& templates);

enum class BackendKind { OpenAiCompatible, LocalServer, Mock };

std::string_view to_string(BackendKind kind);
/// Accepts `openai`, `openai_compatible`, `local`, `local_server`, `mock`.
std::optional<BackendKind> parse_backend(std::string_view text);

struct RetryPolicy
{
    int max_attempts = 3;
    std::vector<double> backoff_seconds = {1.0, 2.0, 4.0};
};

struct LlmConfig
{
    BackendKind backend = BackendKind::Mock;
    std::string endpoint;
    std::string model = "mock";
    double temperature = 0.0;
    int max_output_tokens = 1024;
    double price_in_per_1k = 0.0;
    double price_out_per_1k = 0.0;
    RetryPolicy retry;
    int concurrency_limit = 1;
    std::size_t context_window = 16385;
    std::string api_key;
    double timeout_seconds = 120.0;

    /// Fills the key from `PONZILENS_API_KEY` and the default endpoint.
    void apply_environment();
    /// InvalidArgument on inconsistent settings, AuthError when a remote
    /// backend has no key.
    void validate() const;
};

struct Completion
{
    std::string text;
    std::size_t input_tokens = 0;
    std::size_t output_tokens = 0;
    double wall_seconds = 0.0;
};

/// Sends one prompt. Retries transport errors, 429 and 5xx per `cfg.retry`;
/// throws BackendUnavailable, ContextOverflow or AuthError.
Completion complete(const PromptBundle& prompt, const LlmConfig& cfg);

/// Rule-based stand-in used by tests and offline runs. A pure function of the
/// prompt: latency is simulated from the token count, never measured.
Completion mock_complete(const PromptBundle& prompt);

/// Last standalone `true`/`false` token, case-insensitive.
bool parse_verdict(std::string_view text);

struct RunRecord
{
    std::optional<bool> verdict;
    std::string analysis_text;
    std::string detection_text;
    std::size_t input_tokens = 0;
    std::size_t output_tokens = 0;
    double wall_seconds = 0.0;
    double cost = 0.0;
    std::optional<std::string> error;
};

struct ReportError
{
    std::string phase;
    std::string code;
    std::string message;
};

struct ReportStats
{
    std::size_t functions_total = 0;
    std::size_t functions_selected = 0;
    std::size_t slice_bytes = 0;
    std::size_t source_bytes = 0;
    std::vector<std::string> selected;
    std::vector<std::string> tainted_state_vars;
};

struct DetectionReport
{
    std::string contract_id;
    std::string path_or_address;
    Mode mode = Mode::Full;
    std::string backend;
    std::string model;
    std::string template_version;
    std::string compiler_version;
    std::vector<RunRecord> runs;
    std::optional<bool> final_verdict;
    std::size_t votes_true = 0;
    std::size_t votes_false = 0;
    std::size_t unparseable = 0;
    std::size_t input_tokens = 0;
    std::size_t output_tokens = 0;
    double wall_seconds = 0.0;
    double total_cost = 0.0;
    ReportStats stats;
    std::optional<ReportError> error;

    [[nodiscard]] nlohmann::json to_json() const;
    static DetectionReport from_json(const nlohmann::json& j);
};

/// Majority of parsed verdicts; a tie counts as positive. Empty when no run
/// produced a verdict.
std::optional<bool> majority_verdict(std::size_t votes_true, std::size_t votes_false);

/// Thread-safe running totals across contracts.
class CostLedger
{
public:
    void add(const RunRecord& run);
    [[nodiscard]] std::size_t input_tokens() const { return input_tokens_.load(); }
    [[nodiscard]] std::size_t output_tokens() const { return output_tokens_.load(); }
    [[nodiscard]] double cost() const { return cost_.load(); }
    [[nodiscard]] std::size_t runs() const { return runs_.load(); }

private:
    std::atomic<std::size_t> input_tokens_{0};
    std::atomic<std::size_t> output_tokens_{0};
    std::atomic<std::size_t> runs_{0};
    std::atomic<double> cost_{0.0};
};

struct DetectConfig
{
    LlmConfig llm;
    Mode mode = Mode::Full;
    int repeats = 5;
    TemplateSet templates;
    /// Overrides `templates.ponzi_definition` when set.
    std::optional<std::string> ponzi_definition;
    StaticOptions static_options;
    const CompilerSelector* compilers = nullptr;
    const FetchConfig* fetch = nullptr;
    CostLedger* ledger = nullptr;
    /// Observes every prompt before it is sent.
    std::function<void(const PromptBundle&)> on_prompt;
};

/// Runs the static phase once, then `repeats` analysis/detection rounds.
/// Never throws for pipeline failures: they land in `report.error`.
DetectionReport detect_contract(const SourceUnit& unit, const DetectConfig& cfg);
/// Ingests first; ingest failures are reported with phase `ingest`.
DetectionReport detect_contract(const std::string& id, const std::string& path_or_address, const DetectConfig& cfg);

}  // namespace ponzilens
