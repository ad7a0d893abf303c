#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lfqa {

/// Fractions in [0, 1].
struct RougeScore {
    double precision = 0.0;
    double recall = 0.0;
    double fmeasure = 0.0;
};

using Tokens = std::vector<std::string>;

/// Lowercase, map every run of non-[a-z0-9] to a separator, Porter-stem
/// tokens longer than three characters.
Tokens rouge_tokenize(std::string_view text, bool use_stemmer = true);

/// Splits on newlines, then after '.', '!' or '?' followed by a space.
/// Blank sentences are dropped.
std::vector<std::string> split_sentences(std::string_view text);

/// split_sentences joined with '\n', the input format rouge_lsum expects.
std::string sentences_to_lines(std::string_view text);

double f_measure(double precision, double recall);

RougeScore ngram_score(const Tokens& target, const Tokens& prediction, int n);
RougeScore lcs_score(const Tokens& target, const Tokens& prediction);
RougeScore summary_lcs_score(const std::vector<Tokens>& target_sents, const std::vector<Tokens>& prediction_sents);

RougeScore rouge_n(std::string_view target, std::string_view prediction, int n, bool use_stemmer = true);
RougeScore rouge_l(std::string_view target, std::string_view prediction, bool use_stemmer = true);
/// Summary-level LCS; sentences are the '\n'-separated lines of each text.
RougeScore rouge_lsum(std::string_view target, std::string_view prediction, bool use_stemmer = true);

} // namespace lfqa
