#include "ponzilens/error.hpp"
#include "ponzilens/eval.hpp"

#include <cmath>
#include <limits>

namespace ponzilens {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

nlohmann::json ratio(double v)
{
    return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v);
}

void tally(MetricsSummary& m, Label label, std::optional<bool> verdict)
{
    if (!verdict) {
        ++m.unparseable;
        return;
    }
    if (label == Label::Ponzi)
        ++(*verdict ? m.tp : m.fn);
    else
        ++(*verdict ? m.fp : m.tn);
}

void finish(MetricsSummary& m)
{
    Rates r = rates_from_counts(m.tp, m.tn, m.fp, m.fn);
    m.tpr = r.tpr;
    m.tnr = r.tnr;
    m.fpr = r.fpr;
    m.fnr = r.fnr;
    m.bac = r.bac;
}

const ManifestEntry& entry_for(const DatasetManifest& manifest, const DetectionReport& r)
{
    const ManifestEntry* e = manifest.find(r.contract_id);
    if (e == nullptr)
        throw Error(ErrorCode::LabelMismatch, "report '" + r.contract_id + "' is not in manifest '" + manifest.name + "'");
    return *e;
}

}  // namespace

double balanced_accuracy(double tpr, double tnr)
{
    return (tpr + tnr) / 2.0;
}

Rates rates_from_counts(std::size_t tp, std::size_t tn, std::size_t fp, std::size_t fn)
{
    Rates r;
    r.tpr = tp + fn == 0 ? kNaN : static_cast<double>(tp) / static_cast<double>(tp + fn);
    r.tnr = tn + fp == 0 ? kNaN : static_cast<double>(tn) / static_cast<double>(tn + fp);
    r.fpr = 1.0 - r.tnr;
    r.fnr = 1.0 - r.tpr;
    r.bac = balanced_accuracy(r.tpr, r.tnr);
    return r;
}

MetricsSummary compute_metrics(const DatasetManifest& manifest, const std::vector<DetectionReport>& reports)
{
    MetricsSummary m;
    for (const auto& r : reports) {
        const ManifestEntry& e = entry_for(manifest, r);
        if (r.error)
            ++m.errors;
        else
            tally(m, e.label, r.final_verdict);
    }
    finish(m);
    return m;
}

std::vector<MetricsSummary> compute_run_metrics(const DatasetManifest& manifest, const std::vector<DetectionReport>& reports)
{
    std::size_t runs = 0;
    for (const auto& r : reports)
        runs = std::max(runs, r.runs.size());
    std::vector<MetricsSummary> out(runs);
    for (const auto& r : reports) {
        const ManifestEntry& e = entry_for(manifest, r);
        for (std::size_t k = 0; k < runs; ++k) {
            if (k < r.runs.size())
                tally(out[k], e.label, r.runs[k].verdict);
            else
                ++out[k].errors;
        }
    }
    for (auto& m : out)
        finish(m);
    return out;
}

Rates mean_rates(const std::vector<MetricsSummary>& per_run)
{
    auto mean = [&](auto field) {
        double sum = 0;
        std::size_t n = 0;
        for (const auto& m : per_run)
            if (!std::isnan(m.*field)) {
                sum += m.*field;
                ++n;
            }
        return n == 0 ? kNaN : sum / static_cast<double>(n);
    };
    return {mean(&MetricsSummary::tpr), mean(&MetricsSummary::tnr), mean(&MetricsSummary::fpr),
            mean(&MetricsSummary::fnr), mean(&MetricsSummary::bac)};
}

nlohmann::json MetricsSummary::to_json() const
{
    return {{"tp", tp}, {"tn", tn}, {"fp", fp}, {"fn", fn}, {"unparseable", unparseable}, {"errors", errors},
            {"tpr", ratio(tpr)}, {"tnr", ratio(tnr)}, {"fpr", ratio(fpr)}, {"fnr", ratio(fnr)}, {"bac", ratio(bac)}};
}

OverheadStats aggregate_overhead(const std::vector<DetectionReport>& reports)
{
    OverheadStats s;
    std::vector<double> times;
    for (const auto& r : reports) {
        if (r.runs.empty())
            continue;
        times.push_back(r.wall_seconds);
        s.total_cost += r.total_cost;
        s.total_tokens += r.input_tokens + r.output_tokens;
    }
    s.contracts = times.size();
    if (times.empty())
        return s;
    double n = static_cast<double>(times.size());
    double sum = 0;
    for (double t : times)
        sum += t;
    s.mean_seconds = sum / n;
    double sq = 0;
    for (double t : times)
        sq += (t - s.mean_seconds) * (t - s.mean_seconds);
    s.std_seconds = std::sqrt(sq / n);
    s.mean_tokens = static_cast<double>(s.total_tokens) / n;
    s.mean_cost = s.total_cost / n;
    return s;
}

nlohmann::json OverheadStats::to_json() const
{
    return {{"contracts", contracts},     {"mean_seconds", mean_seconds}, {"std_seconds", std_seconds},
            {"mean_tokens", mean_tokens}, {"mean_cost", mean_cost},       {"total_cost", total_cost},
            {"total_tokens", total_tokens}};
}

}  // namespace ponzilens
