#pragma once

#include "lfqa/rc_client.hpp"
#include "lfqa/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lfqa {

/// Scores are percentages in [0, 100]; absent means the metric does not apply.
struct EvalScores {
    double words = 0.0;
    std::optional<double> rouge1;
    std::optional<double> rouge2;
    std::optional<double> rougeL;
    std::optional<double> disambig_f1;
    std::optional<double> dr;
    std::optional<double> qaeval;
};

/// SQuAD normalization: lowercase, drop punctuation and articles, split on
/// whitespace.
std::vector<std::string> normalize_answer(std::string_view s);

/// Bag-of-tokens F1 over normalized answers, in [0, 1].
double token_f1(std::string_view pred, std::string_view gold);

/// ROUGE f-measures × 100 with the stemming tokenizer. rouge_lsum_score
/// splits both texts into sentences first.
double rouge_lsum_score(std::string_view sys, std::string_view ref);
double rouge_n_score(std::string_view sys, std::string_view ref, int n);

using TextScoreFn = std::function<double(std::string_view sys, std::string_view ref)>;

/// Max of score_fn(sys, ref) over refs; empty refs is a data_error.
double max_over_refs(const TextScoreFn& score_fn, std::string_view sys, const std::vector<std::string>& refs);

/// How per-question scores combine several gold answers.
enum class GoldAggregation { max, mean };

struct QaScoringOptions {
    GoldAggregation aggregation = GoldAggregation::max;
    std::size_t parallelism = 4;
};

/// Mean over questions of the RC answer's token F1 against the gold answers,
/// × 100. no_answer scores 0. RC failures propagate. An empty context scores
/// 0 without calling the RC.
double disambig_f1(std::string_view long_answer, const std::vector<QaPair>& qa_pairs, ReadingComprehension& rc,
                   const QaScoringOptions& opts = {});

/// Same aggregation as disambig_f1 over externally supplied questions.
double qa_eval(std::string_view summary, const std::vector<QaPair>& eval_questions, ReadingComprehension& rc,
               const QaScoringOptions& opts = {});

/// Geometric mean of two percentages; throws config_error outside [0, 100].
double dr_score(double rougeL, double disambig);

std::size_t word_count(std::string_view text);

struct EvalToggles {
    bool rouge = true;
    bool disambig = true;
    bool qaeval = true;
};

/// Full per-example evaluation against every gold long answer (max over
/// references). disambig_f1 is set when enabled and the example has QA
/// pairs, qaeval likewise for eval questions, dr when both ROUGE-L and
/// disambig_f1 are set.
EvalScores evaluate_answer(std::string_view answer, const DatasetExample& gold, ReadingComprehension* rc,
                           const EvalToggles& toggles = {}, const QaScoringOptions& opts = {});

} // namespace lfqa
