#pragma once

#include "lfqa/similarity.hpp"
#include "lfqa/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace lfqa {

struct QuestionAnswer {
    std::string question;
    std::string answer;
    bool operator==(const QuestionAnswer&) const = default;
};

struct AnswerFacet {
    std::string label;
    std::string answer;
    bool operator==(const AnswerFacet&) const = default;
};

struct NlRefinement {
    std::string text;
    bool operator==(const NlRefinement&) const = default;
};

struct QaRefinement {
    std::vector<QuestionAnswer> pairs;
    bool operator==(const QaRefinement&) const = default;
};

struct AfRefinement {
    std::vector<AnswerFacet> facets;
    bool operator==(const AfRefinement&) const = default;
};

using Refinement = std::variant<NlRefinement, QaRefinement, AfRefinement>;

struct ParsedOutput {
    std::optional<Refinement> refinement;
    std::string answer; // equals `raw` when parse_ok is false
    bool parse_ok = false;
    std::string raw;
};

struct PromptSpec {
    std::string instruction;
    std::vector<Exemplar> exemplars; // prompt order: the last one sits next to the query
    RefinementMode mode = RefinementMode::none;
    std::string query;
    // Gold disambiguated questions for the query; required (possibly empty)
    // in af_oracle_disambig mode.
    std::optional<std::vector<std::string>> oracle_questions;

    bool operator==(const PromptSpec&) const = default;
};

// The runner asks the model to stop here; parse_output guards independently.
inline constexpr std::string_view stop_sequence = "\nQuestion:";

// Joins the short answers of one facet in AF and QA refinement lines.
inline constexpr std::string_view facet_answer_separator = ", ";

std::string_view instruction_for(DatasetKind target);

std::string facet_answer_text(const FacetPair& facet);
// The facet's disambiguated question, or "{label}?" when the pool has none.
std::string facet_question_text(const FacetPair& facet);
bool has_synthesized_questions(const Exemplar& ex);

/// The refinement an exemplar demonstrates in `mode`; nullopt for mode none.
/// Throws data_error when NL mode meets an exemplar without an explanation.
std::optional<Refinement> refinement_of(const Exemplar& ex, RefinementMode mode);

/// The part of an exemplar the model is expected to generate after its
/// "Question:" line: the refinement block followed by the "Answer:" line.
std::string render_exemplar_body(const Exemplar& ex, RefinementMode mode);

std::string render_prompt(const PromptSpec& spec);

/// k most similar exemplars in prompt order: least similar first, most
/// similar last.
std::vector<Exemplar> select_dynamic(std::string_view question, const ExemplarPool& pool, std::size_t k,
                                     MetricKind metric, SimilarityClient* client, const RankOptions& opts = {});

/// k exemplars of pairwise distinct type, listed in taxonomy order. Both the
/// types (when k is below the number present) and the member of each type
/// are drawn uniformly under `seed`.
std::vector<Exemplar> select_diverse(const ExemplarPool& pool, std::size_t k, std::uint64_t seed);

/// k exemplars drawn uniformly without replacement under `seed`.
std::vector<Exemplar> select_random(const ExemplarPool& pool, std::size_t k, std::uint64_t seed);

using TokenCounter = std::function<std::size_t(std::string_view)>;

std::size_t whitespace_token_count(std::string_view text);

/// Drops exemplars from the front (least similar) until the rendered prompt
/// fits in `budget` tokens. Throws config_error when even the bare
/// instruction and query do not fit.
PromptSpec truncate_to_budget(PromptSpec spec, std::size_t budget, const TokenCounter& count_tokens);

/// Splits generated text into refinement and long-form answer. Total: any
/// failure yields parse_ok == false with answer == raw.
ParsedOutput parse_output(std::string_view raw, RefinementMode mode);

} // namespace lfqa
