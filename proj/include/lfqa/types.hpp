#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lfqa {

/// Kind of multifacetedness a question exhibits. Declaration order is the
/// canonical taxonomy order and is used wherever exemplars are listed by type.
enum class QuestionType {
    conditional,
    set_valued,
    time_dependent,
    underspecified_reference,
    underspecified_type,
    needs_elaboration,
};

inline constexpr std::array<QuestionType, 6> all_question_types = {
    QuestionType::conditional,
    QuestionType::set_valued,
    QuestionType::time_dependent,
    QuestionType::underspecified_reference,
    QuestionType::underspecified_type,
    QuestionType::needs_elaboration,
};

std::string_view to_string(QuestionType t);
std::optional<QuestionType> parse_question_type(std::string_view name);

enum class DatasetKind { asqa, aquamuse };

std::string_view to_string(DatasetKind k);
std::optional<DatasetKind> parse_dataset_kind(std::string_view name);

/// Which intermediate refinement an exemplar carries between its question and
/// its answer.
enum class RefinementMode { none, nl, qa, af, af_oracle_disambig };

std::string_view to_string(RefinementMode m);
std::optional<RefinementMode> parse_refinement_mode(std::string_view name);

/// One facet of a multifaceted question and its short answer(s).
struct FacetPair {
    std::string label;                   // e.g. "band"
    std::optional<std::string> question; // full disambiguated question
    std::vector<std::string> answers;    // non-empty, verbatim

    bool operator==(const FacetPair&) const = default;
};

struct Exemplar {
    std::string id;
    std::string question;
    QuestionType qtype = QuestionType::conditional;
    std::vector<FacetPair> facets;
    std::optional<std::string> nl_explanation;
    std::string long_answer;
    DatasetKind source_dataset = DatasetKind::asqa;

    bool operator==(const Exemplar&) const = default;
};

/// Validated, immutable set of exemplars with pairwise distinct ids.
class ExemplarPool {
public:
    ExemplarPool() = default;
    // Throws data_error on duplicate ids.
    explicit ExemplarPool(std::vector<Exemplar> exemplars);

    const std::vector<Exemplar>& exemplars() const { return exemplars_; }
    std::size_t size() const { return exemplars_.size(); }
    bool empty() const { return exemplars_.empty(); }

    const std::map<QuestionType, std::size_t>& counts_by_type() const { return counts_; }
    const Exemplar* find(std::string_view id) const;

    auto begin() const { return exemplars_.begin(); }
    auto end() const { return exemplars_.end(); }

private:
    std::vector<Exemplar> exemplars_;
    std::map<QuestionType, std::size_t> counts_;
};

/// Concatenates pools; ids must stay unique across the union.
ExemplarPool merge_pools(const std::vector<ExemplarPool>& pools);

/// A question with its gold short answers (disambiguated QA pair, or a QAEval
/// question).
struct QaPair {
    std::string question;
    std::vector<std::string> answers;

    bool operator==(const QaPair&) const = default;
};

struct DatasetExample {
    std::string id;
    std::string question;
    std::vector<std::string> gold_long_answers;
    std::vector<QaPair> gold_qa_pairs;  // empty when unavailable
    std::vector<QaPair> eval_questions; // empty when unavailable

    bool operator==(const DatasetExample&) const = default;
};

} // namespace lfqa
