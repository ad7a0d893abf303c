#pragma once

#include "lfqa/http_options.hpp"
#include "lfqa/prompting.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace lfqa {

struct GenerationRequest {
    std::string model_id;
    std::string prompt;
    int max_new_tokens = 512;
    double temperature = 0.0; // greedy
    std::vector<std::string> stop_sequences;
};

// Throws config_error on max_new_tokens < 1, negative temperature or an empty
// stop sequence.
void validate(const GenerationRequest& req);

// Canonical JSON of everything that influences the completion (model, prompt,
// decode parameters). Used as the cache key material.
std::string canonical_request(const GenerationRequest& req);
std::string request_digest(const GenerationRequest& req);

/// Text-completion backend. Implementations throw transport_error for
/// retryable failures and endpoint_error for everything else.
class CompletionEndpoint {
public:
    virtual ~CompletionEndpoint() = default;
    virtual std::string complete(const GenerationRequest& req) = 0;
    virtual std::string describe() const = 0;
};

/// Wire contract: POST {"model","prompt","max_tokens","temperature","stop"}
/// -> {"text"}.
class HttpCompletionEndpoint final : public CompletionEndpoint {
public:
    explicit HttpCompletionEndpoint(std::string url, HttpOptions opts = HttpOptions::from_env());
    std::string complete(const GenerationRequest& req) override;
    std::string describe() const override { return url_; }

private:
    std::string url_;
    HttpOptions opts_;
};

/// Deterministic offline model: maps the SHA-256 of a prompt to a canned
/// completion. Table lines are {"prompt_sha256": hex, "completion": text}.
class ReplayEndpoint final : public CompletionEndpoint {
public:
    explicit ReplayEndpoint(std::unordered_map<std::string, std::string> table, std::string name = "replay");
    static ReplayEndpoint load(const std::filesystem::path& path);

    std::string complete(const GenerationRequest& req) override;
    std::string describe() const override { return name_; }

    std::size_t calls() const { return calls_.load(); }

private:
    std::unordered_map<std::string, std::string> table_;
    std::string name_;
    std::atomic<std::size_t> calls_{0};
};

/// Adapts a callable; handy for stubs and instrumentation.
class FunctionEndpoint final : public CompletionEndpoint {
public:
    using Fn = std::function<std::string(const GenerationRequest&)>;
    explicit FunctionEndpoint(Fn fn, std::string name = "function") : fn_(std::move(fn)), name_(std::move(name)) {}
    std::string complete(const GenerationRequest& req) override { return fn_(req); }
    std::string describe() const override { return name_; }

private:
    Fn fn_;
    std::string name_;
};

struct RetryPolicy {
    int max_attempts = 4;
    std::chrono::milliseconds initial_backoff{250};
    std::chrono::milliseconds max_backoff{4000};
};

/// Cuts `text` before the earliest occurrence of any stop sequence.
std::string truncate_at_stop(std::string_view text, const std::vector<std::string>& stop_sequences);

/// One completion, truncated at the first stop sequence. transport_error is
/// retried with capped exponential backoff; once attempts run out it
/// surfaces as endpoint_error. Empty completions are returned as-is.
std::string generate(const GenerationRequest& req, CompletionEndpoint& endpoint, const RetryPolicy& retry = {});

/// Content-addressed store of completions: <dir>/<digest[0:2]>/<digest>.json
/// holding the canonical request next to the text. Writes go through a
/// temporary file and an atomic rename; concurrent misses on one key are
/// collapsed into a single computation.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    // Throws data_error naming the key when the entry is unreadable or was
    // stored for a different request.
    std::optional<std::string> lookup(const GenerationRequest& req) const;
    void store(const GenerationRequest& req, const std::string& text);

    struct Result {
        std::string text;
        bool hit = false;
    };
    Result get_or_compute(const GenerationRequest& req, const std::function<std::string()>& compute);

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path entry_path(const std::string& digest) const;

    std::filesystem::path dir_;
    std::mutex mu_;
    std::map<std::string, std::shared_future<std::string>> inflight_;
};

struct GenerationRecord {
    std::string request_digest;
    std::string raw_text;
    ParsedOutput parsed;
    std::chrono::milliseconds latency{0};
    bool cache_hit = false;
};

GenerationRecord cached_generate(const GenerationRequest& req, RefinementMode mode, CompletionEndpoint& endpoint,
                                 ResponseCache& cache, const RetryPolicy& retry = {});

} // namespace lfqa
