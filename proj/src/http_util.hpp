#pragma once

#include "lfqa/http_options.hpp"

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace lfqa::detail {

struct HttpTarget {
    std::string origin; // scheme://host[:port]
    std::string path;   // always starts with '/'
    std::string url;    // as given, for diagnostics
};

// Throws config_error for anything that is not an http(s) URL.
HttpTarget parse_http_url(std::string_view url);

// POSTs a JSON body and returns the decoded JSON response.
// Connection failures, 429 and 5xx raise transport_error; other non-2xx
// statuses and undecodable bodies raise endpoint_error.
nlohmann::json post_json(const HttpTarget& target, const nlohmann::json& body, const HttpOptions& opts);

} // namespace lfqa::detail
