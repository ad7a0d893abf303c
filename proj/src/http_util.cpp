#include "http_util.hpp"

#include "lfqa/error.hpp"

#include <cstdlib>

#include <httplib.h>

namespace lfqa {

HttpOptions HttpOptions::from_env() {
    HttpOptions opts;
    if (const char* token = std::getenv(api_token_env)) opts.bearer_token = token;
    return opts;
}

namespace detail {

HttpTarget parse_http_url(std::string_view url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos) {
        throw config_error("not an http(s) URL: \"" + std::string(url) + "\"");
    }
    auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw config_error("unsupported URL scheme in \"" + std::string(url) + "\"");
    }
    auto rest = url.substr(scheme_end + 3);
    auto slash = rest.find('/');
    auto host = rest.substr(0, slash);
    if (host.empty()) throw config_error("URL has no host: \"" + std::string(url) + "\"");

    HttpTarget t;
    t.origin = std::string(scheme) + "://" + std::string(host);
    t.path = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
    t.url = std::string(url);
    return t;
}

nlohmann::json post_json(const HttpTarget& target, const nlohmann::json& body, const HttpOptions& opts) {
    httplib::Client client(target.origin);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(opts.connect_timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(opts.read_timeout));
    httplib::Headers headers;
    if (!opts.bearer_token.empty()) headers.emplace("Authorization", "Bearer " + opts.bearer_token);

    auto res = client.Post(target.path, headers, body.dump(), "application/json");
    if (!res) {
        throw transport_error("POST " + target.url + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status == 429 || res->status >= 500) {
        throw transport_error("POST " + target.url + " returned HTTP " + std::to_string(res->status));
    }
    if (res->status < 200 || res->status >= 300) {
        throw endpoint_error("POST " + target.url + " returned HTTP " + std::to_string(res->status) + ": " +
                             res->body.substr(0, 200));
    }
    try {
        return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
        throw endpoint_error("malformed response from " + target.url + ": " + e.what());
    }
}

} // namespace detail
} // namespace lfqa
