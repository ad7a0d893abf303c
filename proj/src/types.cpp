#include "lfqa/types.hpp"

#include "lfqa/error.hpp"

#include <set>

namespace lfqa {

namespace {

constexpr std::array<std::string_view, 6> question_type_names = {
    "Conditional",
    "SetValued",
    "TimeDependent",
    "UnderspecifiedReference",
    "UnderspecifiedType",
    "NeedsElaboration",
};

constexpr std::array<std::string_view, 5> refinement_mode_names = {
    "none", "nl", "qa", "af", "af_oracle_disambig",
};

} // namespace

std::string_view to_string(QuestionType t) {
    return question_type_names[static_cast<std::size_t>(t)];
}

std::optional<QuestionType> parse_question_type(std::string_view name) {
    for (std::size_t i = 0; i < question_type_names.size(); ++i) {
        if (question_type_names[i] == name) {
            return static_cast<QuestionType>(i);
        }
    }
    return std::nullopt;
}

std::string_view to_string(DatasetKind k) {
    return k == DatasetKind::asqa ? "asqa" : "aquamuse";
}

std::optional<DatasetKind> parse_dataset_kind(std::string_view name) {
    if (name == "asqa") return DatasetKind::asqa;
    if (name == "aquamuse") return DatasetKind::aquamuse;
    return std::nullopt;
}

std::string_view to_string(RefinementMode m) {
    return refinement_mode_names[static_cast<std::size_t>(m)];
}

std::optional<RefinementMode> parse_refinement_mode(std::string_view name) {
    for (std::size_t i = 0; i < refinement_mode_names.size(); ++i) {
        if (refinement_mode_names[i] == name) {
            return static_cast<RefinementMode>(i);
        }
    }
    return std::nullopt;
}

ExemplarPool::ExemplarPool(std::vector<Exemplar> exemplars) : exemplars_(std::move(exemplars)) {
    std::set<std::string_view> seen;
    for (const auto& ex : exemplars_) {
        if (!seen.insert(ex.id).second) {
            throw data_error("duplicate exemplar id \"" + ex.id + "\"");
        }
        ++counts_[ex.qtype];
    }
}

const Exemplar* ExemplarPool::find(std::string_view id) const {
    for (const auto& ex : exemplars_) {
        if (ex.id == id) return &ex;
    }
    return nullptr;
}

ExemplarPool merge_pools(const std::vector<ExemplarPool>& pools) {
    std::vector<Exemplar> all;
    for (const auto& p : pools) {
        all.insert(all.end(), p.begin(), p.end());
    }
    return ExemplarPool(std::move(all));
}

} // namespace lfqa
