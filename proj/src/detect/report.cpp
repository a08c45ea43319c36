#include "ponzilens/detect.hpp"
#include "ponzilens/error.hpp"

namespace ponzilens {

std::optional<bool> majority_verdict(std::size_t votes_true, std::size_t votes_false)
{
    if (votes_true + votes_false == 0)
        return std::nullopt;
    return votes_true >= votes_false;
}

void CostLedger::add(const RunRecord& run)
{
    input_tokens_.fetch_add(run.input_tokens);
    output_tokens_.fetch_add(run.output_tokens);
    runs_.fetch_add(1);
    cost_.fetch_add(run.cost);
}

namespace {

nlohmann::json optional_bool(const std::optional<bool>& v)
{
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<bool> read_optional_bool(const nlohmann::json& j, const char* key)
{
    if (!j.contains(key) || j[key].is_null())
        return std::nullopt;
    return j[key].get<bool>();
}

}  // namespace

nlohmann::json DetectionReport::to_json() const
{
    nlohmann::json runs_json = nlohmann::json::array();
    for (const auto& r : runs) {
        runs_json.push_back({{"verdict", optional_bool(r.verdict)},
                             {"analysis", r.analysis_text},
                             {"detection", r.detection_text},
                             {"input_tokens", r.input_tokens},
                             {"output_tokens", r.output_tokens},
                             {"wall_seconds", r.wall_seconds},
                             {"cost", r.cost},
                             {"error", r.error ? nlohmann::json(*r.error) : nlohmann::json(nullptr)}});
    }
    nlohmann::json j = {
        {"contract_id", contract_id},
        {"path_or_address", path_or_address},
        {"mode", to_string(mode)},
        {"backend", backend},
        {"model", model},
        {"template_version", template_version},
        {"compiler_version", compiler_version},
        {"final_verdict", optional_bool(final_verdict)},
        {"votes", {{"true", votes_true}, {"false", votes_false}, {"unparseable", unparseable}}},
        {"input_tokens", input_tokens},
        {"output_tokens", output_tokens},
        {"wall_seconds", wall_seconds},
        {"total_cost", total_cost},
        {"stats",
         {{"functions_total", stats.functions_total},
          {"functions_selected", stats.functions_selected},
          {"slice_bytes", stats.slice_bytes},
          {"source_bytes", stats.source_bytes},
          {"selected", stats.selected},
          {"tainted_state_vars", stats.tainted_state_vars}}},
        {"runs", std::move(runs_json)},
        {"error", nullptr},
    };
    if (error)
        j["error"] = {{"phase", error->phase}, {"code", error->code}, {"message", error->message}};
    return j;
}

DetectionReport DetectionReport::from_json(const nlohmann::json& j)
{
    try {
        DetectionReport r;
        r.contract_id = j.at("contract_id").get<std::string>();
        r.path_or_address = j.value("path_or_address", "");
        r.mode = parse_mode(j.value("mode", "full")).value_or(Mode::Full);
        r.backend = j.value("backend", "");
        r.model = j.value("model", "");
        r.template_version = j.value("template_version", "");
        r.compiler_version = j.value("compiler_version", "");
        r.final_verdict = read_optional_bool(j, "final_verdict");
        const auto votes = j.value("votes", nlohmann::json::object());
        r.votes_true = votes.value("true", std::size_t{0});
        r.votes_false = votes.value("false", std::size_t{0});
        r.unparseable = votes.value("unparseable", std::size_t{0});
        r.input_tokens = j.value("input_tokens", std::size_t{0});
        r.output_tokens = j.value("output_tokens", std::size_t{0});
        r.wall_seconds = j.value("wall_seconds", 0.0);
        r.total_cost = j.value("total_cost", 0.0);
        const auto stats = j.value("stats", nlohmann::json::object());
        r.stats.functions_total = stats.value("functions_total", std::size_t{0});
        r.stats.functions_selected = stats.value("functions_selected", std::size_t{0});
        r.stats.slice_bytes = stats.value("slice_bytes", std::size_t{0});
        r.stats.source_bytes = stats.value("source_bytes", std::size_t{0});
        r.stats.selected = stats.value("selected", std::vector<std::string>{});
        r.stats.tainted_state_vars = stats.value("tainted_state_vars", std::vector<std::string>{});
        for (const auto& jr : j.value("runs", nlohmann::json::array())) {
            RunRecord run;
            run.verdict = read_optional_bool(jr, "verdict");
            run.analysis_text = jr.value("analysis", "");
            run.detection_text = jr.value("detection", "");
            run.input_tokens = jr.value("input_tokens", std::size_t{0});
            run.output_tokens = jr.value("output_tokens", std::size_t{0});
            run.wall_seconds = jr.value("wall_seconds", 0.0);
            run.cost = jr.value("cost", 0.0);
            if (jr.contains("error") && jr["error"].is_string())
                run.error = jr["error"].get<std::string>();
            r.runs.push_back(std::move(run));
        }
        if (j.contains("error") && j["error"].is_object())
            r.error = ReportError{j["error"].value("phase", ""), j["error"].value("code", ""), j["error"].value("message", "")};
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::JsonError, std::string("malformed detection report: ") + e.what());
    }
}

}  // namespace ponzilens
