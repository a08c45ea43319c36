#pragma once

#include "ponzilens/detect.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <stop_token>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ponzilens {

enum class Label { Ponzi, NonPonzi };

std::string_view to_string(Label label);
/// `ponzi`/`1`/`true` or `non_ponzi`/`non-ponzi`/`0`/`false`.
std::optional<Label> parse_label(std::string_view text);

struct ManifestEntry
{
    std::string id;
    std::string path_or_address;
    Label label = Label::NonPonzi;
};

struct DatasetManifest
{
    std::string name;
    std::vector<ManifestEntry> entries;

    [[nodiscard]] const ManifestEntry* find(std::string_view id) const;
    /// InvalidArgument on duplicate or empty ids.
    void validate() const;
};

/// Reads a CSV (`id,path_or_address,label`, header optional) or line-JSON
/// manifest. Relative paths are resolved against the manifest's directory.
DatasetManifest load_manifest(const std::filesystem::path& path);
DatasetManifest parse_manifest(std::string_view text, std::string name, const std::filesystem::path& base_dir = {});

struct MetricsSummary
{
    std::size_t tp = 0;
    std::size_t tn = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t unparseable = 0;
    std::size_t errors = 0;
    /// NaN when the denominator is zero.
    double tpr = 0;
    double tnr = 0;
    double fpr = 0;
    double fnr = 0;
    double bac = 0;

    [[nodiscard]] nlohmann::json to_json() const;
};

struct Rates
{
    double tpr = 0;
    double tnr = 0;
    double fpr = 0;
    double fnr = 0;
    double bac = 0;
};

/// Derives every rate from raw confusion counts.
Rates rates_from_counts(std::size_t tp, std::size_t tn, std::size_t fp, std::size_t fn);
/// (tpr + tnr) / 2, in whatever unit the inputs use.
double balanced_accuracy(double tpr, double tnr);

/// Majority-vote metrics, one prediction per contract. Throws LabelMismatch
/// when a report id is missing from the manifest.
MetricsSummary compute_metrics(const DatasetManifest& manifest, const std::vector<DetectionReport>& reports);

/// Metrics for each run index taken on its own (run k of every contract).
std::vector<MetricsSummary> compute_run_metrics(const DatasetManifest& manifest, const std::vector<DetectionReport>& reports);
/// Mean of each rate over `per_run`, skipping undefined values.
Rates mean_rates(const std::vector<MetricsSummary>& per_run);

struct OverheadStats
{
    std::size_t contracts = 0;
    double mean_seconds = 0;
    double std_seconds = 0;   // population standard deviation
    double mean_tokens = 0;   // per contract, both stages, all runs
    double mean_cost = 0;
    double total_cost = 0;
    std::size_t total_tokens = 0;

    [[nodiscard]] nlohmann::json to_json() const;
};

/// Aggregates over reports that completed at least one run.
OverheadStats aggregate_overhead(const std::vector<DetectionReport>& reports);

struct BatchOptions
{
    /// Line-JSON journal of finished reports; entries found there are reused.
    std::optional<std::filesystem::path> journal;
    int concurrency = 1;
    std::stop_token stop;
    /// Called once per finished contract (journal reuse included), serially.
    std::function<void(const DetectionReport&, std::size_t done, std::size_t total)> on_report;
};

/// Detects every manifest entry, isolating failures per contract. The result
/// follows manifest order; entries skipped by a stop request are absent.
std::vector<DetectionReport> run_batch(const DatasetManifest& manifest, const DetectConfig& cfg, const BatchOptions& options = {});

/// Reads completed reports from a journal, ignoring a torn final line.
std::vector<DetectionReport> read_journal(const std::filesystem::path& path);

/// Writes `reports` as one JSON object per line.
void write_reports(const std::filesystem::path& path, const std::vector<DetectionReport>& reports);
std::vector<DetectionReport> read_reports(const std::filesystem::path& path);

}  // namespace ponzilens
