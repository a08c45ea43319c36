#include "ponzilens/detect.hpp"
#include "ponzilens/error.hpp"

namespace ponzilens {

namespace {

DetectionReport blank_report(const std::string& id, const std::string& path, const DetectConfig& cfg)
{
    DetectionReport r;
    r.contract_id = id;
    r.path_or_address = path;
    r.mode = cfg.mode;
    r.backend = std::string(to_string(cfg.llm.backend));
    r.model = cfg.llm.model;
    r.template_version = cfg.templates.version;
    return r;
}

void record_error(DetectionReport& r, Phase phase, const Error& e)
{
    r.error = ReportError{std::string(to_string(phase)), std::string(to_string(e.code())), e.what()};
}

}  // namespace

DetectionReport detect_contract(const SourceUnit& unit, const DetectConfig& cfg)
{
    DetectionReport report = blank_report(unit.id, unit.path_or_address, cfg);
    report.compiler_version = unit.compiler_version;
    for (const auto& f : unit.files)
        report.stats.source_bytes += f.text.size();

    PromptBundle analysis_prompt;
    try {
        StaticResult s = run_static(unit, cfg.static_options);
        report.stats.functions_total = s.slices.stats.functions_total;
        report.stats.functions_selected = s.slices.stats.selected;
        report.stats.slice_bytes = s.slices.stats.bytes;
        report.stats.selected = s.slices.selected;
        for (NodeId n : tainted_state_vars(s.taint, s.graph))
            report.stats.tainted_state_vars.push_back(s.graph.path_string(n));
        try {
            std::string raw;
            for (const auto& f : unit.files) {
                if (!raw.empty() && !f.text.empty())
                    raw += "\n";
                raw += f.text;
            }
            analysis_prompt = build_analysis_prompt(s.slices, &s.dot, cfg.mode, cfg.templates, raw);
        } catch (const Error& e) {
            throw PhaseError(Phase::Prompt, e);
        }
    } catch (const PhaseError& e) {
        record_error(report, e.phase(), e);
        return report;
    }

    const std::string& definition = cfg.ponzi_definition ? *cfg.ponzi_definition : cfg.templates.ponzi_definition;
    for (int i = 0; i < cfg.repeats; ++i) {
        RunRecord run;
        Phase phase = Phase::Analysis;
        try {
            if (cfg.on_prompt)
                cfg.on_prompt(analysis_prompt);
            Completion a = complete(analysis_prompt, cfg.llm);
            run.analysis_text = a.text;
            phase = Phase::Prompt;
            PromptBundle detection_prompt = build_detection_prompt(a.text, definition, cfg.templates);
            phase = Phase::Detection;
            if (cfg.on_prompt)
                cfg.on_prompt(detection_prompt);
            Completion d = complete(detection_prompt, cfg.llm);
            run.detection_text = d.text;
            run.input_tokens = a.input_tokens + d.input_tokens;
            run.output_tokens = a.output_tokens + d.output_tokens;
            run.wall_seconds = a.wall_seconds + d.wall_seconds;
        } catch (const Error& e) {
            record_error(report, phase, e);
            break;
        }
        run.cost = (static_cast<double>(run.input_tokens) * cfg.llm.price_in_per_1k +
                    static_cast<double>(run.output_tokens) * cfg.llm.price_out_per_1k) / 1000.0;
        try {
            run.verdict = parse_verdict(run.detection_text);
        } catch (const Error& e) {
            run.error = std::string(to_string(e.code())) + ": " + e.what();
        }
        if (!run.verdict)
            ++report.unparseable;
        else if (*run.verdict)
            ++report.votes_true;
        else
            ++report.votes_false;
        report.input_tokens += run.input_tokens;
        report.output_tokens += run.output_tokens;
        report.wall_seconds += run.wall_seconds;
        report.total_cost += run.cost;
        if (cfg.ledger != nullptr)
            cfg.ledger->add(run);
        report.runs.push_back(std::move(run));
    }
    if (!report.error)
        report.final_verdict = majority_verdict(report.votes_true, report.votes_false);
    return report;
}

DetectionReport detect_contract(const std::string& id, const std::string& path_or_address, const DetectConfig& cfg)
{
    SourceUnit unit;
    try {
        unit = ingest(id, path_or_address, cfg.compilers, cfg.fetch);
    } catch (const PhaseError& e) {
        DetectionReport r = blank_report(id, path_or_address, cfg);
        record_error(r, e.phase(), e);
        return r;
    }
    return detect_contract(unit, cfg);
}

}  // namespace ponzilens
