#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace ponzilens::net {

struct HttpResponse
{
    int status = 0;
    std::string body;
    std::map<std::string, std::string> headers;
    /// Non-empty when no HTTP response arrived at all.
    std::string transport_error;
};

using Params = std::vector<std::pair<std::string, std::string>>;

HttpResponse get(const std::string& url, const Params& query, double timeout_seconds);
HttpResponse post_json(const std::string& url, const std::string& body, const Params& headers, double timeout_seconds);

}  // namespace ponzilens::net
