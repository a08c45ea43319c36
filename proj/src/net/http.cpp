#include "http.hpp"

#include <chrono>
#include <cmath>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

namespace ponzilens::net {

namespace {

struct SplitUrl
{
    std::string origin;  // scheme://host[:port]
    std::string target;  // path[?query]
};

SplitUrl split(const std::string& url)
{
    auto scheme_end = url.find("://");
    std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto path_start = url.find('/', host_start);
    auto query_start = url.find('?', host_start);
    std::size_t cut = std::min(path_start, query_start);
    if (cut == std::string::npos)
        return {url, "/"};
    std::string target = url.substr(cut);
    if (target.front() == '?')
        target = "/" + target;
    return {url.substr(0, cut), target};
}

void configure(httplib::Client& client, double timeout_seconds)
{
    auto secs = static_cast<time_t>(timeout_seconds);
    auto usecs = static_cast<time_t>((timeout_seconds - std::floor(timeout_seconds)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
}

HttpResponse convert(const httplib::Result& result)
{
    HttpResponse out;
    if (!result) {
        out.transport_error = httplib::to_string(result.error());
        return out;
    }
    out.status = result->status;
    out.body = result->body;
    for (const auto& [k, v] : result->headers)
        out.headers[k] = v;
    return out;
}

}  // namespace

HttpResponse get(const std::string& url, const Params& query, double timeout_seconds)
{
    SplitUrl parts = split(url);
    std::string target = parts.target;
    char sep = target.find('?') == std::string::npos ? '?' : '&';
    for (const auto& [k, v] : query) {
        target += sep;
        target += httplib::detail::encode_query_param(k) + "=" + httplib::detail::encode_query_param(v);
        sep = '&';
    }
    httplib::Client client(parts.origin);
    configure(client, timeout_seconds);
    return convert(client.Get(target));
}

HttpResponse post_json(const std::string& url, const std::string& body, const Params& headers, double timeout_seconds)
{
    SplitUrl parts = split(url);
    httplib::Client client(parts.origin);
    configure(client, timeout_seconds);
    httplib::Headers h;
    for (const auto& [k, v] : headers)
        h.emplace(k, v);
    return convert(client.Post(parts.target, h, body, "application/json"));
}

}  // namespace ponzilens::net
