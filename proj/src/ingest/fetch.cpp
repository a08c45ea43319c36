#include "ponzilens/error.hpp"
#include "ponzilens/ingest.hpp"

#include "../net/http.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace ponzilens {

namespace {

using nlohmann::ordered_json;

// Arrival jitter at the server side; keeps any 1 s window within the limit.
constexpr auto kWindowMargin = std::chrono::milliseconds(50);

bool contains_ci(std::string_view haystack, std::string_view needle)
{
    auto it = std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end(),
                          [](char a, char b) { return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b)); });
    return it != haystack.end();
}

/// Explorer SourceCode is plain Solidity, a JSON map of files, or a
/// standard-JSON input wrapped in an extra pair of braces.
std::string flatten_source(const std::string& raw)
{
    std::string body = raw;
    if (body.size() >= 4 && body.rfind("{{", 0) == 0)
        body = body.substr(1, body.size() - 2);
    if (body.empty() || body.front() != '{')
        return raw;

    ordered_json doc;
    try {
        doc = ordered_json::parse(body);
    } catch (const ordered_json::parse_error&) {
        return raw;
    }
    const ordered_json& files = doc.contains("sources") ? doc["sources"] : doc;
    if (!files.is_object())
        return raw;

    std::string out;
    for (const auto& [name, entry] : files.items()) {
        std::string content = entry.is_object() ? entry.value("content", "") : "";
        if (!out.empty())
            out += "\n";
        out += "// File: " + name + "\n" + content;
        if (!content.empty() && content.back() != '\n')
            out += "\n";
    }
    return out.empty() ? raw : out;
}

double retry_after_seconds(const net::HttpResponse& res, int attempt)
{
    auto it = res.headers.find("Retry-After");
    if (it != res.headers.end()) {
        char* end = nullptr;
        double v = std::strtod(it->second.c_str(), &end);
        if (end != it->second.c_str() && v >= 0)
            return v;
    }
    return std::min(8.0, 0.5 * std::pow(2.0, attempt));
}

}  // namespace

void FetchConfig::validate() const
{
    if (!(rate_limit > 0))
        throw Error(ErrorCode::InvalidArgument, "rate_limit must be > 0");
    if (!(timeout > 0))
        throw Error(ErrorCode::InvalidArgument, "timeout must be > 0");
}

RateLimiter::RateLimiter(double rate)
    : rate_(rate)
{
    if (!(rate > 0))
        throw Error(ErrorCode::InvalidArgument, "rate must be > 0");
}

void RateLimiter::acquire()
{
    // Sliding log: a new request may start once the `burst`-th most recent
    // one is older than the window. Sub-1/s rates widen the window instead.
    auto burst = static_cast<std::size_t>(std::max(1.0, std::floor(rate_)));
    auto window = std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double>(rate_ >= 1.0 ? 1.0 : 1.0 / rate_) + kWindowMargin);

    std::unique_lock lock(mutex_);
    while (true) {
        auto now = Clock::now();
        while (!recent_.empty() && now - recent_.front() >= window)
            recent_.pop_front();
        if (recent_.size() < burst) {
            recent_.push_back(now);
            return;
        }
        auto wake = recent_.front() + window;
        lock.unlock();
        std::this_thread::sleep_until(wake);
        lock.lock();
    }
}

bool is_valid_address(std::string_view address)
{
    if (address.size() != 42 || address[0] != '0' || (address[1] != 'x' && address[1] != 'X'))
        return false;
    return std::all_of(address.begin() + 2, address.end(), [](unsigned char c) { return std::isxdigit(c) != 0; });
}

SourceUnit fetch_verified_source(std::string_view address, const FetchConfig& cfg, RateLimiter& limiter)
{
    if (!is_valid_address(address))
        throw Error(ErrorCode::InvalidAddress, "not a 40-hex-digit address: '" + std::string(address) + "'");
    cfg.validate();
    std::string key = cfg.api_key;
    if (const char* env = std::getenv("PONZILENS_ETHERSCAN_KEY"); env != nullptr && *env != '\0')
        key = env;
    if (key.empty())
        throw Error(ErrorCode::AuthError, "explorer API key missing (set PONZILENS_ETHERSCAN_KEY)");

    const net::Params query = {{"module", "contract"}, {"action", "getsourcecode"}, {"address", std::string(address)}, {"apikey", key}};

    for (int attempt = 0;; ++attempt) {
        limiter.acquire();
        net::HttpResponse res = net::get(cfg.api_base_url, query, cfg.timeout);
        if (!res.transport_error.empty())
            throw Error(ErrorCode::NetworkError, "explorer request failed: " + res.transport_error);

        bool rate_limited = res.status == 429;
        ordered_json doc;
        if (!rate_limited) {
            if (res.status == 401 || res.status == 403)
                throw Error(ErrorCode::AuthError, "explorer rejected the API key (HTTP " + std::to_string(res.status) + ")");
            if (res.status != 200)
                throw Error(ErrorCode::NetworkError, "explorer returned HTTP " + std::to_string(res.status));
            try {
                doc = ordered_json::parse(res.body);
            } catch (const ordered_json::parse_error&) {
                throw Error(ErrorCode::NetworkError, "explorer response is not JSON");
            }
            if (doc.value("status", "1") == "0" && doc.contains("result") && doc["result"].is_string()) {
                std::string message = doc["result"].get<std::string>();
                if (contains_ci(message, "rate limit"))
                    rate_limited = true;
                else if (contains_ci(message, "api key") || contains_ci(message, "apikey"))
                    throw Error(ErrorCode::AuthError, message);
                else if (contains_ci(message, "not verified"))
                    throw Error(ErrorCode::NotVerified, message);
                else
                    throw Error(ErrorCode::NetworkError, message);
            }
        }
        if (rate_limited) {
            if (attempt >= cfg.max_retries)
                throw Error(ErrorCode::RateLimited, "explorer rate limit persisted after " + std::to_string(attempt + 1) + " attempts");
            std::this_thread::sleep_for(std::chrono::duration<double>(retry_after_seconds(res, attempt)));
            continue;
        }

        if (!doc.contains("result") || !doc["result"].is_array() || doc["result"].empty())
            throw Error(ErrorCode::NetworkError, "explorer response has no result");
        const auto& item = doc["result"][0];
        std::string source = item.value("SourceCode", "");
        if (source.empty() || contains_ci(item.value("ABI", ""), "not verified"))
            throw Error(ErrorCode::NotVerified, "contract source code not verified: " + std::string(address));

        std::string name = item.value("ContractName", "");
        SourceUnit unit = make_source_unit(std::string(address), std::string(address),
                                           (name.empty() ? std::string(address) : name) + ".sol", flatten_source(source));
        return unit;
    }
}

SourceUnit fetch_verified_source(std::string_view address, const FetchConfig& cfg)
{
    cfg.validate();
    RateLimiter limiter(cfg.rate_limit);
    return fetch_verified_source(address, cfg, limiter);
}

}  // namespace ponzilens
