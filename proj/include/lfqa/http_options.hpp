#pragma once

#include <chrono>
#include <string>

namespace lfqa {

// Environment variable holding the bearer token sent to HTTP endpoints.
inline constexpr const char* api_token_env = "LFQA_API_TOKEN";

struct HttpOptions {
    std::chrono::milliseconds connect_timeout{5000};
    std::chrono::milliseconds read_timeout{120000};
    std::string bearer_token; // empty: no Authorization header

    // Options with the bearer token taken from LFQA_API_TOKEN, if set.
    static HttpOptions from_env();
};

} // namespace lfqa
