#include "lfqa/llm_client.hpp"

#include "http_util.hpp"
#include "lfqa/digest.hpp"
#include "lfqa/error.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

namespace lfqa {

using json = nlohmann::ordered_json;

namespace {

json canonical_json(const GenerationRequest& req) {
    json j;
    j["model"] = req.model_id;
    j["prompt"] = req.prompt;
    j["max_tokens"] = req.max_new_tokens;
    j["temperature"] = req.temperature;
    j["stop"] = req.stop_sequences;
    return j;
}

} // namespace

void validate(const GenerationRequest& req) {
    if (req.max_new_tokens < 1) throw config_error("max_new_tokens must be at least 1");
    if (!(req.temperature >= 0.0)) throw config_error("temperature must be non-negative");
    for (const auto& s : req.stop_sequences) {
        if (s.empty()) throw config_error("stop sequences must be non-empty");
    }
}

std::string canonical_request(const GenerationRequest& req) {
    return canonical_json(req).dump();
}

std::string request_digest(const GenerationRequest& req) {
    return sha256_hex(canonical_request(req));
}

HttpCompletionEndpoint::HttpCompletionEndpoint(std::string url, HttpOptions opts)
    : url_(std::move(url)), opts_(std::move(opts)) {
    detail::parse_http_url(url_);
}

std::string HttpCompletionEndpoint::complete(const GenerationRequest& req) {
    auto res = detail::post_json(detail::parse_http_url(url_), canonical_json(req), opts_);
    auto it = res.find("text");
    if (it == res.end() || !it->is_string()) {
        throw endpoint_error("completion response from " + url_ + " lacks a string \"text\" field");
    }
    return it->get<std::string>();
}

ReplayEndpoint::ReplayEndpoint(std::unordered_map<std::string, std::string> table, std::string name)
    : table_(std::move(table)), name_(std::move(name)) {}

ReplayEndpoint ReplayEndpoint::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open replay table " + path.string());
    std::unordered_map<std::string, std::string> table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto where = path.string() + ":" + std::to_string(line_no);
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw data_error(where + ": malformed replay record: " + e.what());
        }
        if (!rec.contains("prompt_sha256") || !rec["prompt_sha256"].is_string() || !rec.contains("completion") ||
            !rec["completion"].is_string()) {
            throw data_error(where + ": replay records need string prompt_sha256 and completion");
        }
        auto key = rec["prompt_sha256"].get<std::string>();
        auto text = rec["completion"].get<std::string>();
        auto [it, inserted] = table.emplace(key, text);
        if (!inserted && it->second != text) {
            throw data_error(where + ": conflicting completions for prompt digest " + key);
        }
    }
    return ReplayEndpoint(std::move(table), "replay:" + path.string());
}

std::string ReplayEndpoint::complete(const GenerationRequest& req) {
    ++calls_;
    auto digest = sha256_hex(req.prompt);
    auto it = table_.find(digest);
    if (it == table_.end()) {
        throw endpoint_error(name_ + " has no completion for prompt digest " + digest);
    }
    return it->second;
}

std::string truncate_at_stop(std::string_view text, const std::vector<std::string>& stop_sequences) {
    auto cut = text.size();
    for (const auto& s : stop_sequences) {
        if (s.empty()) continue;
        cut = std::min(cut, text.find(s));
    }
    return std::string(text.substr(0, cut));
}

std::string generate(const GenerationRequest& req, CompletionEndpoint& endpoint, const RetryPolicy& retry) {
    validate(req);
    auto backoff = retry.initial_backoff;
    const int attempts = std::max(1, retry.max_attempts);
    for (int attempt = 1;; ++attempt) {
        try {
            return truncate_at_stop(endpoint.complete(req), req.stop_sequences);
        } catch (const transport_error& e) {
            if (attempt >= attempts) {
                throw endpoint_error(endpoint.describe() + ": giving up after " + std::to_string(attempts) +
                                     " attempts: " + e.what());
            }
            spdlog::warn("{}: attempt {} failed ({}); retrying in {} ms", endpoint.describe(), attempt, e.what(),
                         backoff.count());
            std::this_thread::sleep_for(backoff);
            backoff = std::min(backoff * 2, retry.max_backoff);
        }
    }
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw data_error("cannot create cache directory " + dir_.string() + ": " + ec.message());
}

std::filesystem::path ResponseCache::entry_path(const std::string& digest) const {
    return dir_ / digest.substr(0, 2) / (digest + ".json");
}

std::optional<std::string> ResponseCache::lookup(const GenerationRequest& req) const {
    const auto digest = request_digest(req);
    const auto path = entry_path(digest);
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::stringstream buf;
    buf << in.rdbuf();
    json entry;
    try {
        entry = json::parse(buf.str());
    } catch (const json::parse_error& e) {
        throw data_error("corrupt cache entry " + digest + ": " + e.what());
    }
    if (!entry.is_object() || !entry.contains("request") || !entry.contains("text") || !entry["text"].is_string()) {
        throw data_error("corrupt cache entry " + digest + ": missing request or text");
    }
    if (entry["request"] != canonical_json(req)) {
        throw data_error("cache entry " + digest + " was stored for a different request");
    }
    return entry["text"].get<std::string>();
}

void ResponseCache::store(const GenerationRequest& req, const std::string& text) {
    const auto digest = request_digest(req);
    const auto path = entry_path(digest);
    std::filesystem::create_directories(path.parent_path());

    json entry;
    entry["request"] = canonical_json(req);
    entry["text"] = text;

    thread_local std::mt19937_64 rng{std::random_device{}()};
    auto tmp = path;
    tmp += ".tmp." + std::to_string(rng());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw data_error("cannot write cache entry " + tmp.string());
        out << entry.dump();
        if (!out.flush()) throw data_error("cannot write cache entry " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw data_error("cannot commit cache entry " + digest);
    }
}

ResponseCache::Result ResponseCache::get_or_compute(const GenerationRequest& req,
                                                    const std::function<std::string()>& compute) {
    const auto digest = request_digest(req);
    std::promise<std::string> promise;
    {
        std::unique_lock lock(mu_);
        if (auto it = inflight_.find(digest); it != inflight_.end()) {
            auto fut = it->second;
            lock.unlock();
            return {fut.get(), true};
        }
        if (auto hit = lookup(req)) return {std::move(*hit), true};
        inflight_.emplace(digest, promise.get_future().share());
    }

    auto finish = [&] {
        std::lock_guard lock(mu_);
        inflight_.erase(digest);
    };
    try {
        auto text = compute();
        store(req, text);
        promise.set_value(text);
        finish();
        return {std::move(text), false};
    } catch (...) {
        promise.set_exception(std::current_exception());
        finish();
        throw;
    }
}

GenerationRecord cached_generate(const GenerationRequest& req, RefinementMode mode, CompletionEndpoint& endpoint,
                                 ResponseCache& cache, const RetryPolicy& retry) {
    validate(req);
    const auto start = std::chrono::steady_clock::now();
    auto result = cache.get_or_compute(req, [&] { return generate(req, endpoint, retry); });

    GenerationRecord rec;
    rec.request_digest = request_digest(req);
    rec.raw_text = std::move(result.text);
    rec.parsed = parse_output(rec.raw_text, mode);
    rec.cache_hit = result.hit;
    rec.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
    return rec;
}

} // namespace lfqa
