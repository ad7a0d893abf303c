#pragma once

// Brute-force reference for ROUGE-N and summary-level ROUGE-L, kept apart
// from the library so the two can be compared. Deliberately naive: memoised
// recursive LCS, n-gram counts by exhaustive rescanning.

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace oracle {

using Tokens = std::vector<std::string>;

struct Prf {
    double p = 0, r = 0, f = 0;
};

inline double fmeasure(double p, double r) {
    return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

inline std::size_t count_ngram(const Tokens& seq, const Tokens& gram) {
    std::size_t c = 0;
    if (seq.size() < gram.size()) return 0;
    for (std::size_t i = 0; i + gram.size() <= seq.size(); ++i) {
        bool eq = true;
        for (std::size_t j = 0; j < gram.size(); ++j) eq = eq && seq[i + j] == gram[j];
        c += eq;
    }
    return c;
}

inline Prf rouge_n(const Tokens& target, const Tokens& pred, std::size_t n) {
    std::set<Tokens> grams;
    for (std::size_t i = 0; i + n <= pred.size(); ++i) grams.insert(Tokens(pred.begin() + i, pred.begin() + i + n));
    std::size_t overlap = 0;
    for (const auto& g : grams) overlap += std::min(count_ngram(pred, g), count_ngram(target, g));
    const double pred_total = pred.size() >= n ? double(pred.size() - n + 1) : 0.0;
    const double target_total = target.size() >= n ? double(target.size() - n + 1) : 0.0;
    Prf s;
    s.p = overlap / std::max(pred_total, 1.0);
    s.r = overlap / std::max(target_total, 1.0);
    s.f = fmeasure(s.p, s.r);
    return s;
}

class Lcs {
public:
    Lcs(const Tokens& a, const Tokens& b) : a_(a), b_(b), memo_(a.size() + 1, std::vector<int>(b.size() + 1, -1)) {}

    // Length of the LCS of a[0:i] and b[0:j].
    int len(std::size_t i, std::size_t j) {
        if (i == 0 || j == 0) return 0;
        int& m = memo_[i][j];
        if (m >= 0) return m;
        if (a_[i - 1] == b_[j - 1]) return m = len(i - 1, j - 1) + 1;
        return m = std::max(len(i - 1, j), len(i, j - 1));
    }

    // Positions in `a` of one LCS, walking back from the end and preferring
    // to drop from `a` on ties.
    std::vector<std::size_t> positions() {
        std::vector<std::size_t> out;
        std::size_t i = a_.size(), j = b_.size();
        while (i > 0 && j > 0) {
            if (a_[i - 1] == b_[j - 1]) {
                out.insert(out.begin(), i - 1);
                --i;
                --j;
            } else if (len(i, j - 1) > len(i - 1, j)) {
                --j;
            } else {
                --i;
            }
        }
        return out;
    }

private:
    const Tokens& a_;
    const Tokens& b_;
    std::vector<std::vector<int>> memo_;
};

inline Prf rouge_l(const Tokens& target, const Tokens& pred) {
    if (target.empty() || pred.empty()) return {};
    Lcs lcs(target, pred);
    const double l = lcs.len(target.size(), pred.size());
    Prf s;
    s.p = l / pred.size();
    s.r = l / target.size();
    s.f = fmeasure(s.p, s.r);
    return s;
}

inline Prf rouge_lsum(const std::vector<Tokens>& target, const std::vector<Tokens>& pred) {
    std::size_t m = 0, n = 0;
    std::map<std::string, int> ref_left, pred_left;
    for (const auto& s : target) {
        m += s.size();
        for (const auto& t : s) ref_left[t]++;
    }
    for (const auto& s : pred) {
        n += s.size();
        for (const auto& t : s) pred_left[t]++;
    }
    if (m == 0 || n == 0) return {};
    std::size_t hits = 0;
    for (const auto& ref : target) {
        std::set<std::size_t> uni;
        for (const auto& p : pred) {
            Lcs lcs(ref, p);
            for (auto i : lcs.positions()) uni.insert(i);
        }
        for (auto i : uni) {
            const auto& t = ref[i];
            if (pred_left[t] > 0 && ref_left[t] > 0) {
                ++hits;
                pred_left[t]--;
                ref_left[t]--;
            }
        }
    }
    Prf s;
    s.p = double(hits) / n;
    s.r = double(hits) / m;
    s.f = fmeasure(s.p, s.r);
    return s;
}

} // namespace oracle
