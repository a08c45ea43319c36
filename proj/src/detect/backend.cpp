#include "ponzilens/detect.hpp"
#include "ponzilens/error.hpp"

#include "net/http.hpp"

#include <chrono>
#include <cstdlib>
#include <regex>
#include <thread>

namespace ponzilens {

std::string_view to_string(BackendKind kind)
{
    switch (kind) {
    case BackendKind::OpenAiCompatible: return "openai_compatible";
    case BackendKind::LocalServer: return "local_server";
    case BackendKind::Mock: return "mock";
    }
    return "unknown";
}

std::optional<BackendKind> parse_backend(std::string_view text)
{
    if (text == "openai" || text == "openai_compatible")
        return BackendKind::OpenAiCompatible;
    if (text == "local" || text == "local_server")
        return BackendKind::LocalServer;
    if (text == "mock")
        return BackendKind::Mock;
    return std::nullopt;
}

void LlmConfig::apply_environment()
{
    if (api_key.empty())
        if (const char* env = std::getenv("PONZILENS_API_KEY"); env != nullptr)
            api_key = env;
    if (endpoint.empty()) {
        if (backend == BackendKind::OpenAiCompatible)
            endpoint = "https://api.openai.com/v1/chat/completions";
        else if (backend == BackendKind::LocalServer)
            endpoint = "http://127.0.0.1:8080/v1/chat/completions";
    }
}

void LlmConfig::validate() const
{
    if (concurrency_limit < 1)
        throw Error(ErrorCode::InvalidArgument, "concurrency limit must be at least 1");
    if (retry.max_attempts < 1)
        throw Error(ErrorCode::InvalidArgument, "retry attempts must be at least 1");
    if (max_output_tokens < 1)
        throw Error(ErrorCode::InvalidArgument, "max output tokens must be at least 1");
    if (price_in_per_1k < 0 || price_out_per_1k < 0)
        throw Error(ErrorCode::InvalidArgument, "prices must not be negative");
    if (temperature < 0)
        throw Error(ErrorCode::InvalidArgument, "temperature must not be negative");
    if (backend != BackendKind::Mock && endpoint.empty())
        throw Error(ErrorCode::InvalidArgument, "backend endpoint is not set");
    if (backend == BackendKind::OpenAiCompatible && api_key.empty())
        throw Error(ErrorCode::AuthError, "the openai backend needs an API key: set PONZILENS_API_KEY");
}

// ---- mock -------------------------------------------------------------

namespace {

constexpr double kMockSecondsPerToken = 0.0005;
constexpr std::string_view kPonziMarker = "funded by new deposits";

bool ident_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

/// Index just past the bracket matching the one at `open`, or npos.
std::size_t match_forward(std::string_view s, std::size_t open)
{
    char o = s[open];
    char c = o == '(' ? ')' : o == '[' ? ']' : '}';
    int depth = 0;
    for (std::size_t i = open; i < s.size(); ++i) {
        if (s[i] == o)
            ++depth;
        else if (s[i] == c && --depth == 0)
            return i + 1;
    }
    return std::string_view::npos;
}

/// Start of the expression ending right before `end` (member chains,
/// indexing and calls such as `payable(xs[i])`).
std::size_t expression_start(std::string_view s, std::size_t end)
{
    std::size_t i = end;
    while (i > 0) {
        char c = s[i - 1];
        if (ident_char(c) || c == '.') {
            --i;
        } else if (c == ']' || c == ')') {
            char open = c == ']' ? '[' : '(';
            int depth = 0;
            std::size_t j = i;
            while (j > 0) {
                --j;
                if (s[j] == c)
                    ++depth;
                else if (s[j] == open && --depth == 0)
                    break;
            }
            if (depth != 0)
                break;
            i = j;
        } else {
            break;
        }
    }
    return i;
}

std::vector<std::string_view> loop_bodies(std::string_view code)
{
    std::vector<std::string_view> bodies;
    static const std::regex header(R"(\b(for|while)\s*\(|\bdo\s*\{)");
    for (auto it = std::cregex_iterator(code.data(), code.data() + code.size(), header); it != std::cregex_iterator(); ++it) {
        std::size_t pos = static_cast<std::size_t>(it->position()) + static_cast<std::size_t>(it->length()) - 1;
        std::size_t body_start = pos;
        if (code[pos] == '(') {
            std::size_t after = match_forward(code, pos);
            if (after == std::string_view::npos)
                continue;
            body_start = after;
            while (body_start < code.size() && std::isspace(static_cast<unsigned char>(code[body_start])))
                ++body_start;
            if (body_start >= code.size() || code[body_start] == ';')
                continue;  // `do { } while (...);` tail or empty loop
        }
        if (code[body_start] == '{') {
            std::size_t end = match_forward(code, body_start);
            if (end != std::string_view::npos)
                bodies.push_back(code.substr(body_start, end - body_start));
        } else {
            std::size_t end = code.find(';', body_start);
            if (end != std::string_view::npos)
                bodies.push_back(code.substr(body_start, end + 1 - body_start));
        }
    }
    return bodies;
}

/// A loop whose body pays a recipient taken from an indexed collection.
bool has_indexed_payout_loop(std::string_view code)
{
    static const std::regex transfer(R"(\.\s*(send|transfer)\s*\(|\.\s*call\s*\{\s*value|\.\s*call\s*\.\s*value\s*\()");
    static const std::regex indexed(R"([A-Za-z_]\w*\s*\[)");
    for (std::string_view body : loop_bodies(code)) {
        if (!std::regex_search(body.begin(), body.end(), indexed))
            continue;
        for (auto it = std::cregex_iterator(body.data(), body.data() + body.size(), transfer); it != std::cregex_iterator(); ++it) {
            std::size_t dot = static_cast<std::size_t>(it->position());
            std::size_t start = expression_start(body, dot);
            std::string_view recipient = body.substr(start, dot - start);
            if (std::regex_search(recipient.begin(), recipient.end(), indexed))
                return true;
        }
    }
    return false;
}

std::string_view between(std::string_view text, std::string_view open, std::string_view close)
{
    std::size_t a = text.find(open);
    if (a == std::string_view::npos)
        return {};
    a += open.size();
    std::size_t b = text.find(close, a);
    return text.substr(a, b == std::string_view::npos ? std::string_view::npos : b - a);
}

std::string mock_analysis(std::string_view prompt)
{
    std::string_view code = between(prompt, "```solidity\n", "\n```");
    std::string out = "Function overview:\n";
    static const std::regex fn(R"(\bfunction\s+([A-Za-z_]\w*)|\bconstructor\s*\()");
    bool any = false;
    for (auto it = std::cregex_iterator(code.data(), code.data() + code.size(), fn); it != std::cregex_iterator(); ++it) {
        out += "- " + ((*it)[1].matched ? (*it)[1].str() : std::string("constructor")) + ": reviewed for fund movements.\n";
        any = true;
    }
    if (!any)
        out += "- no named functions found.\n";
    out += "Fund flow and business model:\n";
    if (has_indexed_payout_loop(code))
        out += "- A loop walks a stored list of participants and sends Ether to them.\n"
               "- Payouts to earlier participants are " + std::string(kPonziMarker) + ".\n";
    else
        out += "- No loop pays participants taken from a stored collection.\n"
               "- Payouts are not tied to later deposits.\n";
    return out;
}

std::string mock_detection(std::string_view prompt)
{
    std::string_view analysis = between(prompt, "<<<ANALYSIS\n", "\nANALYSIS>>>");
    if (analysis.empty())
        analysis = prompt;
    bool positive = analysis.find(kPonziMarker) != std::string_view::npos;
    std::string out = "Step 1: compare the described fund flow with the definition.\n";
    out += positive ? "Step 2: earlier participants are paid from new deposits, which matches the definition.\ntrue\n"
                    : "Step 2: nothing indicates that earlier participants are paid from new deposits.\nfalse\n";
    return out;
}

void check_window(const PromptBundle& prompt, const LlmConfig& cfg)
{
    std::size_t need = estimate_tokens(prompt.rendered) + static_cast<std::size_t>(cfg.max_output_tokens);
    if (need > cfg.context_window)
        throw Error(ErrorCode::ContextOverflow, "prompt needs about " + std::to_string(need) + " tokens, the model window is " +
                                                    std::to_string(cfg.context_window));
}

Completion http_complete(const PromptBundle& prompt, const LlmConfig& cfg)
{
    nlohmann::json body = {{"model", cfg.model},
                           {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt.rendered}}})},
                           {"temperature", cfg.temperature},
                           {"max_tokens", cfg.max_output_tokens}};
    net::Params headers;
    if (!cfg.api_key.empty())
        headers.emplace_back("Authorization", "Bearer " + cfg.api_key);

    std::string last_problem;
    for (int attempt = 1; attempt <= cfg.retry.max_attempts; ++attempt) {
        auto started = std::chrono::steady_clock::now();
        net::HttpResponse r = net::post_json(cfg.endpoint, body.dump(), headers, cfg.timeout_seconds);
        double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

        bool transient = false;
        if (!r.transport_error.empty()) {
            transient = true;
            last_problem = r.transport_error;
        } else if (r.status == 401 || r.status == 403) {
            throw Error(ErrorCode::AuthError, "backend rejected the credentials (HTTP " + std::to_string(r.status) + ")");
        } else if (r.status == 400 && r.body.find("context_length_exceeded") != std::string::npos) {
            throw Error(ErrorCode::ContextOverflow, "backend reports the prompt exceeds the model context window");
        } else if (r.status == 429 || r.status >= 500) {
            transient = true;
            last_problem = "HTTP " + std::to_string(r.status);
        } else if (r.status != 200) {
            throw Error(ErrorCode::BackendUnavailable, "backend answered HTTP " + std::to_string(r.status) + ": " + r.body.substr(0, 200));
        } else {
            auto j = nlohmann::json::parse(r.body, nullptr, false);
            if (j.is_discarded() || !j.contains("choices") || j["choices"].empty())
                throw Error(ErrorCode::BackendUnavailable, "backend response is not a chat completion");
            Completion c;
            const auto& message = j["choices"][0].value("message", nlohmann::json::object());
            c.text = message.contains("content") && message["content"].is_string() ? message["content"].get<std::string>() : "";
            const auto usage = j.value("usage", nlohmann::json::object());
            c.input_tokens = usage.value("prompt_tokens", estimate_tokens(prompt.rendered));
            c.output_tokens = usage.value("completion_tokens", estimate_tokens(c.text));
            c.wall_seconds = seconds;
            return c;
        }

        if (transient && attempt < cfg.retry.max_attempts) {
            double wait = 0;
            if (!cfg.retry.backoff_seconds.empty())
                wait = cfg.retry.backoff_seconds[std::min<std::size_t>(attempt - 1, cfg.retry.backoff_seconds.size() - 1)];
            if (auto it = r.headers.find("Retry-After"); r.status == 429 && it != r.headers.end())
                wait = std::max(wait, std::atof(it->second.c_str()));
            std::this_thread::sleep_for(std::chrono::duration<double>(wait));
        }
    }
    throw Error(ErrorCode::BackendUnavailable, "backend unavailable after " + std::to_string(cfg.retry.max_attempts) +
                                                   " attempts: " + last_problem);
}

}  // namespace

Completion mock_complete(const PromptBundle& prompt)
{
    Completion c;
    c.text = prompt.stage == Stage::Analysis ? mock_analysis(prompt.rendered) : mock_detection(prompt.rendered);
    c.input_tokens = estimate_tokens(prompt.rendered);
    c.output_tokens = estimate_tokens(c.text);
    c.wall_seconds = static_cast<double>(c.input_tokens + c.output_tokens) * kMockSecondsPerToken;
    return c;
}

Completion complete(const PromptBundle& prompt, const LlmConfig& cfg)
{
    check_window(prompt, cfg);
    if (cfg.backend == BackendKind::Mock)
        return mock_complete(prompt);
    return http_complete(prompt, cfg);
}

bool parse_verdict(std::string_view text)
{
    std::optional<bool> last;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!ident_char(text[i])) {
            ++i;
            continue;
        }
        std::size_t start = i;
        while (i < text.size() && ident_char(text[i]))
            ++i;
        std::string word(text.substr(start, i - start));
        for (char& ch : word)
            ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        if (word == "true")
            last = true;
        else if (word == "false")
            last = false;
    }
    if (!last)
        throw Error(ErrorCode::UnparseableVerdict, "no standalone true/false verdict in the response");
    return *last;
}

}  // namespace ponzilens
