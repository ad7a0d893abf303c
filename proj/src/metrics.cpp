#include "lfqa/metrics.hpp"

#include "lfqa/error.hpp"
#include "lfqa/rouge.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <map>

namespace lfqa {

namespace {

bool is_ascii_punct(char c) {
    return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
}

double score_question(const RcAnswer& ans, const std::vector<std::string>& golds, GoldAggregation agg) {
    if (ans.no_answer || golds.empty()) return 0.0;
    double best = 0.0, sum = 0.0;
    for (const auto& g : golds) {
        const double f = token_f1(ans.text, g);
        best = std::max(best, f);
        sum += f;
    }
    return agg == GoldAggregation::max ? best : sum / static_cast<double>(golds.size());
}

double rc_score(std::string_view context, const std::vector<QaPair>& questions, ReadingComprehension& rc,
                const QaScoringOptions& opts, const char* what) {
    if (questions.empty()) throw data_error(std::string(what) + " needs at least one question");
    if (trim(context).empty()) return 0.0;

    const std::string ctx(context);
    const std::size_t parallel = std::max<std::size_t>(1, opts.parallelism);
    std::vector<double> scores(questions.size(), 0.0);
    for (std::size_t start = 0; start < questions.size(); start += parallel) {
        const auto end = std::min(questions.size(), start + parallel);
        std::vector<std::future<RcAnswer>> wave;
        for (auto i = start; i < end; ++i) {
            wave.push_back(std::async(std::launch::async, [&rc, &ctx, &q = questions[i].question] {
                return rc.answer(q, ctx);
            }));
        }
        // Collect every future before rethrowing so no task outlives us.
        std::exception_ptr failure;
        for (auto i = start; i < end; ++i) {
            try {
                scores[i] = score_question(wave[i - start].get(), questions[i].answers, opts.aggregation);
            } catch (...) {
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
    }
    double sum = 0.0;
    for (double s : scores) sum += s;
    return 100.0 * sum / static_cast<double>(scores.size());
}

} // namespace

std::vector<std::string> normalize_answer(std::string_view s) {
    std::string no_punct;
    for (char c : to_lower_ascii(s)) {
        if (!is_ascii_punct(c)) no_punct.push_back(c);
    }
    std::vector<std::string> tokens;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty() && cur != "a" && cur != "an" && cur != "the") tokens.push_back(cur);
        cur.clear();
    };
    for (char c : no_punct) {
        if (is_space(c)) {
            flush();
        } else {
            cur.push_back(c);
        }
    }
    flush();
    return tokens;
}

double token_f1(std::string_view pred, std::string_view gold) {
    const auto p = normalize_answer(pred);
    const auto g = normalize_answer(gold);
    if (p.empty() || g.empty()) return p.empty() && g.empty() ? 1.0 : 0.0;

    std::map<std::string, long> counts;
    for (const auto& t : g) ++counts[t];
    long same = 0;
    for (const auto& t : p) {
        if (auto it = counts.find(t); it != counts.end() && it->second > 0) {
            --it->second;
            ++same;
        }
    }
    if (same == 0) return 0.0;
    const double precision = static_cast<double>(same) / static_cast<double>(p.size());
    const double recall = static_cast<double>(same) / static_cast<double>(g.size());
    return 2.0 * precision * recall / (precision + recall);
}

double rouge_lsum_score(std::string_view sys, std::string_view ref) {
    return 100.0 * rouge_lsum(sentences_to_lines(ref), sentences_to_lines(sys)).fmeasure;
}

double rouge_n_score(std::string_view sys, std::string_view ref, int n) {
    if (n != 1 && n != 2) throw config_error("ROUGE-N is defined here for n = 1 or 2");
    return 100.0 * rouge_n(ref, sys, n).fmeasure;
}

double max_over_refs(const TextScoreFn& score_fn, std::string_view sys, const std::vector<std::string>& refs) {
    if (refs.empty()) throw data_error("no reference texts to score against");
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& r : refs) best = std::max(best, score_fn(sys, r));
    return best;
}

double disambig_f1(std::string_view long_answer, const std::vector<QaPair>& qa_pairs, ReadingComprehension& rc,
                   const QaScoringOptions& opts) {
    return rc_score(long_answer, qa_pairs, rc, opts, "Disambig-F1");
}

double qa_eval(std::string_view summary, const std::vector<QaPair>& eval_questions, ReadingComprehension& rc,
               const QaScoringOptions& opts) {
    return rc_score(summary, eval_questions, rc, opts, "QAEval");
}

double dr_score(double rougeL, double disambig) {
    auto in_range = [](double x) { return x >= 0.0 && x <= 100.0; };
    if (!in_range(rougeL) || !in_range(disambig)) {
        throw config_error("DR inputs must be percentages in [0, 100]");
    }
    return std::sqrt(rougeL * disambig);
}

std::size_t word_count(std::string_view text) {
    std::size_t n = 0;
    bool in_word = false;
    for (char c : text) {
        if (is_space(c)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++n;
        }
    }
    return n;
}

EvalScores evaluate_answer(std::string_view answer, const DatasetExample& gold, ReadingComprehension* rc,
                           const EvalToggles& toggles, const QaScoringOptions& opts) {
    EvalScores s;
    s.words = static_cast<double>(word_count(answer));
    if (toggles.rouge) {
        const auto& refs = gold.gold_long_answers;
        s.rougeL = max_over_refs(rouge_lsum_score, answer, refs);
        s.rouge1 = max_over_refs([](auto a, auto b) { return rouge_n_score(a, b, 1); }, answer, refs);
        s.rouge2 = max_over_refs([](auto a, auto b) { return rouge_n_score(a, b, 2); }, answer, refs);
    }
    const bool want_disambig = toggles.disambig && !gold.gold_qa_pairs.empty();
    const bool want_qaeval = toggles.qaeval && !gold.eval_questions.empty();
    if ((want_disambig || want_qaeval) && !rc) {
        throw config_error("example " + gold.id + " needs a reading comprehension endpoint");
    }
    if (want_disambig) s.disambig_f1 = disambig_f1(answer, gold.gold_qa_pairs, *rc, opts);
    if (want_qaeval) s.qaeval = qa_eval(answer, gold.eval_questions, *rc, opts);
    if (s.rougeL && s.disambig_f1) s.dr = dr_score(*s.rougeL, *s.disambig_f1);
    return s;
}

} // namespace lfqa
