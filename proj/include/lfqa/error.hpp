#pragma once

#include <stdexcept>
#include <string>

namespace lfqa {

// Base for every error the library raises. The three subclasses map onto the
// CLI exit codes (config 1, endpoint 2, data 3).
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration or call parameters.
class config_error : public error {
public:
    using error::error;
};

// A remote endpoint (completion, similarity, reading comprehension) failed.
class endpoint_error : public error {
public:
    using error::error;
};

// A transient transport failure; callers may retry.
class transport_error : public endpoint_error {
public:
    using endpoint_error::endpoint_error;
};

// Malformed or invalid input data (pool, dataset, cache, replay table).
class data_error : public error {
public:
    using error::error;
};

} // namespace lfqa
