#include "lfqa/prompting.hpp"

#include "lfqa/error.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace lfqa {

namespace {

constexpr std::string_view asqa_instruction =
    "I will provide ambiguous questions that have multiple answers about different aspects of the question, "
    "and answer them in detail with at least two sentences.";

constexpr std::string_view aquamuse_instruction =
    "I will provide questions that need to be elaborated to be answered fully, and will answer them in detail "
    "with at least two sentences.";

constexpr std::string_view af_header_asqa = "Disambiguations:";
constexpr std::string_view af_header_aquamuse = "Details:";
constexpr std::string_view oracle_questions_header = "Disambiguated Questions:";
constexpr std::string_view oracle_answers_header = "Disambiguated Answers:";

// "Name: value", or just "Name:" for an empty value.
void append_field(std::string& out, std::string_view name, std::string_view value) {
    out += name;
    out += ':';
    if (!value.empty()) {
        out += ' ';
        out += value;
    }
    out += '\n';
}

void append_line(std::string& out, std::string_view line) {
    out += line;
    out += '\n';
}

void append_facets(std::string& out, const AfRefinement& af) {
    for (const auto& f : af.facets) {
        out += "- ";
        out += f.label;
        out += ": ";
        out += f.answer;
        out += '\n';
    }
}

void append_question_answer(std::string& out, const QuestionAnswer& qa) {
    out += "Q: ";
    out += qa.question;
    out += " A: ";
    out += qa.answer;
    out += '\n';
}

bool starts_with(std::string_view s, std::string_view prefix) {
    return s.substr(0, prefix.size()) == prefix;
}

} // namespace

std::string_view instruction_for(DatasetKind target) {
    return target == DatasetKind::asqa ? asqa_instruction : aquamuse_instruction;
}

std::string facet_answer_text(const FacetPair& facet) {
    std::vector<std::string> parts;
    for (const auto& a : facet.answers) parts.emplace_back(trim(a));
    return join(parts, facet_answer_separator);
}

std::string facet_question_text(const FacetPair& facet) {
    if (facet.question && !trim(*facet.question).empty()) return std::string(trim(*facet.question));
    return std::string(trim(facet.label)) + "?";
}

bool has_synthesized_questions(const Exemplar& ex) {
    return std::any_of(ex.facets.begin(), ex.facets.end(), [](const FacetPair& f) {
        return !f.question || trim(*f.question).empty();
    });
}

std::optional<Refinement> refinement_of(const Exemplar& ex, RefinementMode mode) {
    switch (mode) {
    case RefinementMode::none:
        return std::nullopt;
    case RefinementMode::nl:
        if (!ex.nl_explanation || trim(*ex.nl_explanation).empty()) {
            throw data_error("exemplar \"" + ex.id + "\" has no nl_explanation (required in nl mode)");
        }
        return NlRefinement{std::string(trim(*ex.nl_explanation))};
    case RefinementMode::qa: {
        QaRefinement qa;
        for (const auto& f : ex.facets) qa.pairs.push_back({facet_question_text(f), facet_answer_text(f)});
        return qa;
    }
    case RefinementMode::af:
    case RefinementMode::af_oracle_disambig: {
        AfRefinement af;
        for (const auto& f : ex.facets) af.facets.push_back({std::string(trim(f.label)), facet_answer_text(f)});
        return af;
    }
    }
    return std::nullopt;
}

std::string render_exemplar_body(const Exemplar& ex, RefinementMode mode) {
    std::string out;
    const auto refinement = refinement_of(ex, mode);
    switch (mode) {
    case RefinementMode::none:
        break;
    case RefinementMode::nl:
        append_line(out, std::get<NlRefinement>(*refinement).text);
        break;
    case RefinementMode::qa:
        for (const auto& qa : std::get<QaRefinement>(*refinement).pairs) append_question_answer(out, qa);
        break;
    case RefinementMode::af:
        append_line(out, ex.source_dataset == DatasetKind::asqa ? af_header_asqa : af_header_aquamuse);
        append_facets(out, std::get<AfRefinement>(*refinement));
        break;
    case RefinementMode::af_oracle_disambig:
        append_line(out, oracle_questions_header);
        for (const auto& f : ex.facets) append_field(out, "Q", facet_question_text(f));
        append_line(out, oracle_answers_header);
        append_facets(out, std::get<AfRefinement>(*refinement));
        break;
    }
    append_field(out, "Answer", ex.long_answer);
    return out;
}

std::string render_prompt(const PromptSpec& spec) {
    if (spec.mode == RefinementMode::af_oracle_disambig && !spec.oracle_questions) {
        throw config_error("af_oracle_disambig prompts need the gold disambiguated questions");
    }
    std::string out;
    append_line(out, spec.instruction);
    out += '\n';
    for (const auto& ex : spec.exemplars) {
        append_field(out, "Question", ex.question);
        out += render_exemplar_body(ex, spec.mode);
        out += '\n';
    }
    append_field(out, "Question", spec.query);
    if (spec.mode == RefinementMode::af_oracle_disambig && !spec.oracle_questions->empty()) {
        append_line(out, oracle_questions_header);
        for (const auto& q : *spec.oracle_questions) append_field(out, "Q", trim(q));
    }
    return out;
}

std::vector<Exemplar> select_dynamic(std::string_view question, const ExemplarPool& pool, std::size_t k,
                                     MetricKind metric, SimilarityClient* client, const RankOptions& opts) {
    if (k > pool.size()) {
        throw config_error("k = " + std::to_string(k) + " exceeds pool size " + std::to_string(pool.size()));
    }
    if (k == 0) return {};
    const auto ranked = rank_pool(question, pool, metric, client, opts);
    std::vector<Exemplar> out;
    out.reserve(k);
    for (std::size_t i = k; i-- > 0;) out.push_back(*ranked[i].exemplar);
    return out;
}

std::vector<Exemplar> select_diverse(const ExemplarPool& pool, std::size_t k, std::uint64_t seed) {
    std::vector<QuestionType> present;
    for (auto t : all_question_types) {
        if (pool.counts_by_type().count(t)) present.push_back(t);
    }
    if (k > present.size()) {
        throw config_error("k = " + std::to_string(k) + " exceeds the " + std::to_string(present.size()) +
                           " question types present in the pool");
    }

    std::mt19937_64 rng(seed);
    std::shuffle(present.begin(), present.end(), rng);
    present.resize(k);
    std::sort(present.begin(), present.end());

    std::vector<Exemplar> out;
    for (auto t : present) {
        std::vector<const Exemplar*> members;
        for (const auto& ex : pool) {
            if (ex.qtype == t) members.push_back(&ex);
        }
        std::sort(members.begin(), members.end(), [](auto* a, auto* b) { return a->id < b->id; });
        std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
        out.push_back(*members[pick(rng)]);
    }
    return out;
}

std::vector<Exemplar> select_random(const ExemplarPool& pool, std::size_t k, std::uint64_t seed) {
    if (k > pool.size()) {
        throw config_error("k = " + std::to_string(k) + " exceeds pool size " + std::to_string(pool.size()));
    }
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<Exemplar> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back(pool.exemplars()[order[i]]);
    return out;
}

std::size_t whitespace_token_count(std::string_view text) {
    std::size_t count = 0;
    bool in_token = false;
    for (char c : text) {
        if (is_space(c)) {
            in_token = false;
        } else if (!in_token) {
            in_token = true;
            ++count;
        }
    }
    return count;
}

PromptSpec truncate_to_budget(PromptSpec spec, std::size_t budget, const TokenCounter& count_tokens) {
    PromptSpec bare = spec;
    bare.exemplars.clear();
    const auto floor = count_tokens(render_prompt(bare));
    if (floor > budget) {
        throw config_error("prompt budget of " + std::to_string(budget) + " tokens cannot hold the instruction and query (" +
                           std::to_string(floor) + " tokens)");
    }
    std::size_t drop = 0;
    while (drop < spec.exemplars.size()) {
        PromptSpec candidate = spec;
        candidate.exemplars.erase(candidate.exemplars.begin(), candidate.exemplars.begin() + static_cast<std::ptrdiff_t>(drop));
        if (count_tokens(render_prompt(candidate)) <= budget) return candidate;
        ++drop;
    }
    return bare;
}

namespace {

using Lines = std::vector<std::string_view>;

std::optional<AfRefinement> parse_facets(const Lines& block, bool oracle) {
    AfRefinement af;
    bool seen_header = false;
    for (auto raw_line : block) {
        auto line = trim(raw_line);
        if (line.empty()) continue;
        if (af.facets.empty()) {
            if (!seen_header && (line == af_header_asqa || line == af_header_aquamuse)) {
                seen_header = true;
                continue;
            }
            if (oracle && (line == oracle_questions_header || line == oracle_answers_header || starts_with(line, "Q:"))) {
                continue;
            }
        }
        if (!starts_with(line, "- ")) return std::nullopt;
        auto body = line.substr(2);
        auto sep = body.find(": ");
        if (sep == std::string_view::npos) return std::nullopt;
        auto label = trim(body.substr(0, sep));
        if (label.empty()) return std::nullopt;
        af.facets.push_back({std::string(label), std::string(trim(body.substr(sep + 2)))});
    }
    if (af.facets.empty()) return std::nullopt;
    return af;
}

std::optional<QaRefinement> parse_question_answers(const Lines& block) {
    QaRefinement qa;
    Lines lines;
    for (auto l : block) {
        if (!trim(l).empty()) lines.push_back(trim(l));
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (!starts_with(lines[i], "Q:")) return std::nullopt;
        auto rest = trim(lines[i].substr(2));
        auto sep = rest.find(" A: ");
        if (sep != std::string_view::npos) {
            qa.pairs.push_back({std::string(trim(rest.substr(0, sep))), std::string(trim(rest.substr(sep + 4)))});
            continue;
        }
        if (i + 1 >= lines.size() || !starts_with(lines[i + 1], "A:")) return std::nullopt;
        qa.pairs.push_back({std::string(rest), std::string(trim(lines[i + 1].substr(2)))});
        ++i;
    }
    if (qa.pairs.empty()) return std::nullopt;
    return qa;
}

} // namespace

ParsedOutput parse_output(std::string_view raw, RefinementMode mode) {
    ParsedOutput out;
    out.raw = std::string(raw);
    auto fail = [&] {
        out.parse_ok = false;
        out.refinement.reset();
        out.answer = out.raw;
        return out;
    };

    const auto lines = split_lines(raw);
    std::size_t guard = lines.size();
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (starts_with(lines[i], "Question:")) {
            guard = i;
            break;
        }
    }
    std::size_t answer_at = guard;
    for (std::size_t i = 0; i < guard; ++i) {
        if (starts_with(lines[i], "Answer:")) {
            answer_at = i;
            break;
        }
    }
    if (answer_at == guard) return fail();

    std::string answer(trim_left(lines[answer_at].substr(7)));
    for (std::size_t i = answer_at + 1; i < guard; ++i) {
        answer += '\n';
        answer += lines[i];
    }
    out.answer = std::string(trim_right(answer));

    const Lines block(lines.begin(), lines.begin() + static_cast<std::ptrdiff_t>(answer_at));
    switch (mode) {
    case RefinementMode::none:
        break;
    case RefinementMode::nl: {
        std::string text;
        for (auto l : block) {
            if (!text.empty()) text += '\n';
            text += l;
        }
        auto t = trim(text);
        if (t.empty()) return fail();
        out.refinement = NlRefinement{std::string(t)};
        break;
    }
    case RefinementMode::qa: {
        auto qa = parse_question_answers(block);
        if (!qa) return fail();
        out.refinement = std::move(*qa);
        break;
    }
    case RefinementMode::af:
    case RefinementMode::af_oracle_disambig: {
        auto af = parse_facets(block, mode == RefinementMode::af_oracle_disambig);
        if (!af) return fail();
        out.refinement = std::move(*af);
        break;
    }
    }
    out.parse_ok = true;
    return out;
}

} // namespace lfqa
