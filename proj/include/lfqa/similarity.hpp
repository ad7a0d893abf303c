#pragma once

#include "lfqa/http_options.hpp"
#include "lfqa/types.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lfqa {

enum class MetricKind { bm25, embedding_greedy_f1 };

std::string_view to_string(MetricKind m);
std::optional<MetricKind> parse_metric_kind(std::string_view name);

// Okapi defaults.
struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

struct Bm25CorpusStats {
    std::size_t doc_count = 0;
    std::unordered_map<std::string, std::size_t> doc_freq;
    double avg_doc_len = 0.0;

    static Bm25CorpusStats from_documents(const std::vector<std::vector<std::string>>& docs);
};

/// Lowercases and splits on every non-alphanumeric byte. No stemming.
std::vector<std::string> bm25_tokenize(std::string_view text);

/// Okapi BM25 with the non-negative idf ln(1 + (N - df + 0.5) / (df + 0.5)).
/// Every query token occurrence contributes, so repeated query terms count
/// repeatedly. Throws data_error for an empty corpus and config_error for
/// out-of-range parameters.
double bm25_score(std::span<const std::string> query, std::span<const std::string> doc,
                  const Bm25CorpusStats& stats, const Bm25Params& params = {});

struct RankedExemplar {
    const Exemplar* exemplar = nullptr;
    double score = 0.0;
};

struct TextPair {
    std::string a;
    std::string b;
};

/// Client for the embedding similarity endpoint: one score per pair,
/// order-preserving.
class SimilarityClient {
public:
    virtual ~SimilarityClient() = default;
    virtual std::vector<double> score(const std::vector<TextPair>& pairs) = 0;
    virtual std::string describe() const = 0;
};

/// Wire contract: POST {"pairs":[{"a":..,"b":..}]} -> {"scores":[..]}.
class HttpSimilarityClient final : public SimilarityClient {
public:
    explicit HttpSimilarityClient(std::string url, HttpOptions opts = HttpOptions::from_env());

    std::vector<double> score(const std::vector<TextPair>& pairs) override;
    std::string describe() const override { return url_; }

private:
    std::string url_;
    HttpOptions opts_;
};

struct RankOptions {
    std::size_t batch_size = 32;
    std::size_t parallelism = 4;
    Bm25Params bm25;
};

/// Ranks the whole pool by similarity of each exemplar question to
/// `question`: non-increasing score, ties broken by ascending id.
/// BM25 corpus statistics come from the pool questions. The embedding metric
/// needs `client`; its failures surface as endpoint_error, never as a silent
/// BM25 fallback.
std::vector<RankedExemplar> rank_pool(std::string_view question, const ExemplarPool& pool, MetricKind metric,
                                      SimilarityClient* client, const RankOptions& opts = {});

} // namespace lfqa
