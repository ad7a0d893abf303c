#include "lfqa/similarity.hpp"

#include "http_util.hpp"
#include "lfqa/error.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <unordered_set>

namespace lfqa {

std::string_view to_string(MetricKind m) {
    return m == MetricKind::bm25 ? "bm25" : "embedding_greedy_f1";
}

std::optional<MetricKind> parse_metric_kind(std::string_view name) {
    if (name == "bm25") return MetricKind::bm25;
    if (name == "embedding_greedy_f1") return MetricKind::embedding_greedy_f1;
    return std::nullopt;
}

std::vector<std::string> bm25_tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : text) {
        if (is_alnum_ascii(c)) {
            cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

Bm25CorpusStats Bm25CorpusStats::from_documents(const std::vector<std::vector<std::string>>& docs) {
    Bm25CorpusStats stats;
    stats.doc_count = docs.size();
    std::size_t total = 0;
    for (const auto& doc : docs) {
        total += doc.size();
        std::unordered_set<std::string_view> unique(doc.begin(), doc.end());
        for (auto term : unique) ++stats.doc_freq[std::string(term)];
    }
    stats.avg_doc_len = docs.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(docs.size());
    return stats;
}

double bm25_score(std::span<const std::string> query, std::span<const std::string> doc,
                  const Bm25CorpusStats& stats, const Bm25Params& params) {
    if (stats.doc_count == 0) throw data_error("bm25: empty corpus");
    if (!(stats.avg_doc_len > 0.0)) throw data_error("bm25: corpus has zero average document length");
    if (params.k1 < 0.0 || params.b < 0.0 || params.b > 1.0) {
        throw config_error("bm25: parameters out of range (k1 >= 0, 0 <= b <= 1)");
    }

    std::unordered_map<std::string_view, std::size_t> tf;
    for (const auto& t : doc) ++tf[t];

    const double n = static_cast<double>(stats.doc_count);
    const double length_norm =
        1.0 - params.b + params.b * static_cast<double>(doc.size()) / stats.avg_doc_len;
    double score = 0.0;
    for (const auto& term : query) {
        auto it = tf.find(term);
        if (it == tf.end()) continue;
        auto df_it = stats.doc_freq.find(term);
        const double df = df_it == stats.doc_freq.end() ? 0.0 : static_cast<double>(df_it->second);
        const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        const double f = static_cast<double>(it->second);
        score += idf * f * (params.k1 + 1.0) / (f + params.k1 * length_norm);
    }
    return score;
}

HttpSimilarityClient::HttpSimilarityClient(std::string url, HttpOptions opts)
    : url_(std::move(url)), opts_(std::move(opts)) {
    detail::parse_http_url(url_); // validate early
}

std::vector<double> HttpSimilarityClient::score(const std::vector<TextPair>& pairs) {
    nlohmann::json body;
    body["pairs"] = nlohmann::json::array();
    for (const auto& p : pairs) body["pairs"].push_back({{"a", p.a}, {"b", p.b}});

    auto res = detail::post_json(detail::parse_http_url(url_), body, opts_);
    auto it = res.find("scores");
    if (it == res.end() || !it->is_array()) {
        throw endpoint_error("similarity response from " + url_ + " lacks a \"scores\" array");
    }
    std::vector<double> scores;
    for (const auto& s : *it) {
        if (!s.is_number()) throw endpoint_error("similarity response from " + url_ + " has a non-numeric score");
        scores.push_back(s.get<double>());
    }
    return scores;
}

namespace {

std::vector<double> embedding_scores(std::string_view question, const ExemplarPool& pool, SimilarityClient& client,
                                     const RankOptions& opts) {
    const std::size_t batch = std::max<std::size_t>(1, opts.batch_size);
    const std::size_t parallel = std::max<std::size_t>(1, opts.parallelism);

    std::vector<std::vector<TextPair>> batches;
    for (std::size_t i = 0; i < pool.size(); i += batch) {
        std::vector<TextPair> pairs;
        for (std::size_t j = i; j < std::min(pool.size(), i + batch); ++j) {
            pairs.push_back({std::string(question), pool.exemplars()[j].question});
        }
        batches.push_back(std::move(pairs));
    }

    std::vector<double> scores(pool.size());
    for (std::size_t wave = 0; wave < batches.size(); wave += parallel) {
        std::vector<std::future<std::vector<double>>> inflight;
        const auto wave_end = std::min(batches.size(), wave + parallel);
        for (std::size_t b = wave; b < wave_end; ++b) {
            inflight.push_back(std::async(std::launch::async, [&client, &batches, b] { return client.score(batches[b]); }));
        }
        for (std::size_t b = wave; b < wave_end; ++b) {
            std::vector<double> got;
            try {
                got = inflight[b - wave].get();
            } catch (const config_error&) {
                throw;
            } catch (const std::exception& e) {
                throw endpoint_error("similarity endpoint " + client.describe() + " failed: " + e.what());
            }
            if (got.size() != batches[b].size()) {
                throw endpoint_error("similarity endpoint " + client.describe() + " returned " +
                                     std::to_string(got.size()) + " scores for " +
                                     std::to_string(batches[b].size()) + " pairs");
            }
            for (std::size_t j = 0; j < got.size(); ++j) {
                if (!std::isfinite(got[j]) || got[j] < -1.0 || got[j] > 1.0) {
                    throw endpoint_error("similarity endpoint " + client.describe() +
                                         " returned a score outside [-1, 1]");
                }
                scores[b * batch + j] = got[j];
            }
        }
    }
    return scores;
}

} // namespace

std::vector<RankedExemplar> rank_pool(std::string_view question, const ExemplarPool& pool, MetricKind metric,
                                      SimilarityClient* client, const RankOptions& opts) {
    if (pool.empty()) throw data_error("rank_pool: empty pool");

    std::vector<double> scores;
    if (metric == MetricKind::bm25) {
        std::vector<std::vector<std::string>> docs;
        docs.reserve(pool.size());
        for (const auto& ex : pool) docs.push_back(bm25_tokenize(ex.question));
        const auto stats = Bm25CorpusStats::from_documents(docs);
        const auto query = bm25_tokenize(question);
        for (const auto& doc : docs) scores.push_back(bm25_score(query, doc, stats, opts.bm25));
    } else {
        if (client == nullptr) throw config_error("embedding_greedy_f1 ranking requires a similarity endpoint");
        scores = embedding_scores(question, pool, *client, opts);
    }

    std::vector<RankedExemplar> ranked;
    ranked.reserve(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) ranked.push_back({&pool.exemplars()[i], scores[i]});
    std::sort(ranked.begin(), ranked.end(), [](const RankedExemplar& l, const RankedExemplar& r) {
        if (l.score != r.score) return l.score > r.score;
        return l.exemplar->id < r.exemplar->id;
    });
    return ranked;
}

} // namespace lfqa
