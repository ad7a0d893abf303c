#include "lfqa/rouge.hpp"

#include "lfqa/error.hpp"
#include "lfqa/porter_stemmer.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

namespace lfqa {

namespace {

bool is_token_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
}

std::vector<std::size_t> lcs_indices(const Tokens& ref, const Tokens& can) {
    const auto rows = ref.size();
    const auto cols = can.size();
    std::vector<std::vector<std::size_t>> t(rows + 1, std::vector<std::size_t>(cols + 1, 0));
    for (std::size_t i = 1; i <= rows; ++i) {
        for (std::size_t j = 1; j <= cols; ++j) {
            t[i][j] = ref[i - 1] == can[j - 1] ? t[i - 1][j - 1] + 1 : std::max(t[i - 1][j], t[i][j - 1]);
        }
    }
    std::vector<std::size_t> out;
    auto i = rows;
    auto j = cols;
    while (i > 0 && j > 0) {
        if (ref[i - 1] == can[j - 1]) {
            out.push_back(i - 1);
            --i;
            --j;
        } else if (t[i][j - 1] > t[i - 1][j]) {
            --j;
        } else {
            --i;
        }
    }
    std::reverse(out.begin(), out.end());
    return out;
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::map<std::vector<std::string>, std::size_t> ngram_counts(const Tokens& tokens, int n) {
    std::map<std::vector<std::string>, std::size_t> counts;
    const auto un = static_cast<std::size_t>(n);
    if (tokens.size() < un) return counts;
    for (std::size_t i = 0; i + un <= tokens.size(); ++i) {
        ++counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + un)];
    }
    return counts;
}

std::vector<Tokens> tokenize_lines(std::string_view text, bool use_stemmer) {
    std::vector<Tokens> out;
    for (auto line : split_lines(text)) {
        if (line.empty()) continue;
        out.push_back(rouge_tokenize(line, use_stemmer));
    }
    return out;
}

} // namespace

Tokens rouge_tokenize(std::string_view text, bool use_stemmer) {
    Tokens tokens;
    std::string cur;
    auto flush = [&] {
        if (cur.empty()) return;
        tokens.push_back(use_stemmer && cur.size() > 3 ? porter_stem(cur) : cur);
        cur.clear();
    };
    for (char c : to_lower_ascii(text)) {
        if (is_token_char(c)) {
            cur.push_back(c);
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    auto emit = [&](std::string_view s) {
        s = trim(s);
        if (!s.empty()) out.emplace_back(s);
    };
    for (auto line : split_lines(text)) {
        std::size_t start = 0;
        for (std::size_t i = 0; i + 1 < line.size(); ++i) {
            const char c = line[i];
            if ((c == '.' || c == '!' || c == '?') && line[i + 1] == ' ') {
                emit(line.substr(start, i + 1 - start));
                start = i + 1;
            }
        }
        emit(line.substr(start));
    }
    return out;
}

std::string sentences_to_lines(std::string_view text) {
    return join(split_sentences(text), "\n");
}

double f_measure(double precision, double recall) {
    return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

RougeScore ngram_score(const Tokens& target, const Tokens& prediction, int n) {
    if (n < 1) throw config_error("ROUGE-N needs n >= 1");
    const auto target_ngrams = ngram_counts(target, n);
    const auto pred_ngrams = ngram_counts(prediction, n);
    std::size_t overlap = 0, target_total = 0, pred_total = 0;
    for (const auto& [g, c] : target_ngrams) {
        target_total += c;
        if (auto it = pred_ngrams.find(g); it != pred_ngrams.end()) overlap += std::min(c, it->second);
    }
    for (const auto& [g, c] : pred_ngrams) pred_total += c;

    RougeScore s;
    s.precision = static_cast<double>(overlap) / static_cast<double>(std::max<std::size_t>(pred_total, 1));
    s.recall = static_cast<double>(overlap) / static_cast<double>(std::max<std::size_t>(target_total, 1));
    s.fmeasure = f_measure(s.precision, s.recall);
    return s;
}

RougeScore lcs_score(const Tokens& target, const Tokens& prediction) {
    if (target.empty() || prediction.empty()) return {};
    const auto lcs = static_cast<double>(lcs_length(target, prediction));
    RougeScore s;
    s.precision = lcs / static_cast<double>(prediction.size());
    s.recall = lcs / static_cast<double>(target.size());
    s.fmeasure = f_measure(s.precision, s.recall);
    return s;
}

RougeScore summary_lcs_score(const std::vector<Tokens>& target_sents, const std::vector<Tokens>& prediction_sents) {
    if (target_sents.empty() || prediction_sents.empty()) return {};
    std::size_t m = 0, n = 0;
    std::unordered_map<std::string, long> ref_counts, can_counts;
    for (const auto& s : target_sents) {
        m += s.size();
        for (const auto& t : s) ++ref_counts[t];
    }
    for (const auto& s : prediction_sents) {
        n += s.size();
        for (const auto& t : s) ++can_counts[t];
    }
    if (m == 0 || n == 0) return {};

    // Each reference sentence contributes the union of its LCS positions
    // against every candidate sentence; hits are capped by token supply.
    std::size_t hits = 0;
    for (const auto& ref : target_sents) {
        std::set<std::size_t> positions;
        for (const auto& can : prediction_sents) {
            for (auto idx : lcs_indices(ref, can)) positions.insert(idx);
        }
        for (auto idx : positions) {
            const auto& tok = ref[idx];
            auto& c = can_counts[tok];
            auto& r = ref_counts[tok];
            if (c > 0 && r > 0) {
                ++hits;
                --c;
                --r;
            }
        }
    }
    RougeScore s;
    s.recall = static_cast<double>(hits) / static_cast<double>(m);
    s.precision = static_cast<double>(hits) / static_cast<double>(n);
    s.fmeasure = f_measure(s.precision, s.recall);
    return s;
}

RougeScore rouge_n(std::string_view target, std::string_view prediction, int n, bool use_stemmer) {
    return ngram_score(rouge_tokenize(target, use_stemmer), rouge_tokenize(prediction, use_stemmer), n);
}

RougeScore rouge_l(std::string_view target, std::string_view prediction, bool use_stemmer) {
    return lcs_score(rouge_tokenize(target, use_stemmer), rouge_tokenize(prediction, use_stemmer));
}

RougeScore rouge_lsum(std::string_view target, std::string_view prediction, bool use_stemmer) {
    return summary_lcs_score(tokenize_lines(target, use_stemmer), tokenize_lines(prediction, use_stemmer));
}

} // namespace lfqa
