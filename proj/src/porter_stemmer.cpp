#include "lfqa/porter_stemmer.hpp"

#include <functional>
#include <initializer_list>
#include <unordered_map>
#include <vector>

namespace lfqa {

namespace {

bool is_vowel(char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

// 'y' is a consonant iff it starts the word or follows a vowel.
bool is_consonant(std::string_view w, std::size_t i) {
    if (is_vowel(w[i])) return false;
    if (w[i] != 'y') return true;
    bool negate = false;
    while (i > 0 && w[i] == 'y') {
        negate = !negate;
        --i;
    }
    return !is_vowel(w[i]) != negate;
}

std::vector<bool> consonant_flags(std::string_view w) {
    std::vector<bool> flags(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (is_vowel(w[i])) {
            flags[i] = false;
        } else if (w[i] == 'y') {
            flags[i] = i == 0 ? true : !flags[i - 1];
        } else {
            flags[i] = true;
        }
    }
    return flags;
}

// Number of vowel-run/consonant-run transitions, the "m" of [C](VC){m}[V].
int measure(std::string_view stem) {
    const auto flags = consonant_flags(stem);
    int m = 0;
    for (std::size_t i = 1; i < flags.size(); ++i) {
        if (!flags[i - 1] && flags[i]) ++m;
    }
    return m;
}

bool contains_vowel(std::string_view stem) {
    for (bool c : consonant_flags(stem)) {
        if (!c) return true;
    }
    return false;
}

bool ends_with(std::string_view w, std::string_view suffix) {
    return w.size() >= suffix.size() && w.substr(w.size() - suffix.size()) == suffix;
}

bool ends_double_consonant(std::string_view w) {
    return w.size() >= 2 && w[w.size() - 1] == w[w.size() - 2] && is_consonant(w, w.size() - 1);
}

bool ends_cvc(std::string_view w) {
    const auto n = w.size();
    if (n >= 3 && is_consonant(w, n - 3) && !is_consonant(w, n - 2) && is_consonant(w, n - 1) && w[n - 1] != 'w' &&
        w[n - 1] != 'x' && w[n - 1] != 'y') {
        return true;
    }
    return n == 2 && !is_consonant(w, 0) && is_consonant(w, 1);
}

using Condition = std::function<bool(std::string_view)>;

struct Rule {
    std::string_view suffix; // "*d" matches a trailing double consonant
    std::string replacement;
    Condition condition;     // empty: unconditional
};

// First rule whose suffix matches decides; a failed condition stops the scan.
std::string apply_rules(std::string_view word, const std::vector<Rule>& rules) {
    for (const auto& rule : rules) {
        if (rule.suffix == "*d" && ends_double_consonant(word)) {
            auto stem = word.substr(0, word.size() - 2);
            if (!rule.condition || rule.condition(stem)) return std::string(stem) + rule.replacement;
            return std::string(word);
        }
        if (ends_with(word, rule.suffix)) {
            auto stem = word.substr(0, word.size() - rule.suffix.size());
            if (!rule.condition || rule.condition(stem)) return std::string(stem) + rule.replacement;
            return std::string(word);
        }
    }
    return std::string(word);
}

bool positive_measure(std::string_view stem) {
    return measure(stem) > 0;
}

bool measure_above_one(std::string_view stem) {
    return measure(stem) > 1;
}

std::string replace_suffix(std::string_view w, std::string_view suffix, std::string_view replacement) {
    return std::string(w.substr(0, w.size() - suffix.size())) + std::string(replacement);
}

std::string step1a(std::string_view w) {
    if (ends_with(w, "ies") && w.size() == 4) return replace_suffix(w, "ies", "ie");
    return apply_rules(w, {{"sses", "ss", {}}, {"ies", "i", {}}, {"ss", "ss", {}}, {"s", "", {}}});
}

std::string step1b(std::string_view w) {
    if (ends_with(w, "ied")) {
        return replace_suffix(w, "ied", w.size() == 4 ? "ie" : "i");
    }
    if (ends_with(w, "eed")) {
        auto stem = w.substr(0, w.size() - 3);
        return measure(stem) > 0 ? std::string(stem) + "ee" : std::string(w);
    }

    std::string_view intermediate;
    bool matched = false;
    for (std::string_view suffix : {std::string_view("ed"), std::string_view("ing")}) {
        if (ends_with(w, suffix)) {
            intermediate = w.substr(0, w.size() - suffix.size());
            if (contains_vowel(intermediate)) {
                matched = true;
                break;
            }
        }
    }
    if (!matched) return std::string(w);

    const char last = intermediate.back();
    return apply_rules(intermediate,
                       {
                           {"at", "ate", {}},
                           {"bl", "ble", {}},
                           {"iz", "ize", {}},
                           {"*d", std::string(1, last), [last](std::string_view) {
                                return last != 'l' && last != 's' && last != 'z';
                            }},
                           {"", "e", [](std::string_view stem) { return measure(stem) == 1 && ends_cvc(stem); }},
                       });
}

std::string step1c(std::string_view w) {
    return apply_rules(w, {{"y", "i", [](std::string_view stem) {
                                return stem.size() > 1 && is_consonant(stem, stem.size() - 1);
                            }}});
}

std::string step2(std::string_view w) {
    if (ends_with(w, "alli") && positive_measure(w.substr(0, w.size() - 4))) {
        return step2(replace_suffix(w, "alli", "al"));
    }
    const std::string word(w);
    std::vector<Rule> rules = {
        {"ational", "ate", positive_measure}, {"tional", "tion", positive_measure},
        {"enci", "ence", positive_measure},   {"anci", "ance", positive_measure},
        {"izer", "ize", positive_measure},    {"bli", "ble", positive_measure},
        {"alli", "al", positive_measure},     {"entli", "ent", positive_measure},
        {"eli", "e", positive_measure},       {"ousli", "ous", positive_measure},
        {"ization", "ize", positive_measure}, {"ation", "ate", positive_measure},
        {"ator", "ate", positive_measure},    {"alism", "al", positive_measure},
        {"iveness", "ive", positive_measure}, {"fulness", "ful", positive_measure},
        {"ousness", "ous", positive_measure}, {"aliti", "al", positive_measure},
        {"iviti", "ive", positive_measure},   {"biliti", "ble", positive_measure},
        {"fulli", "ful", positive_measure},
        // The 'l' of "logi" stays with the stem so short stems like "geo" work.
        {"logi", "log", [&word](std::string_view) {
             return positive_measure(std::string_view(word).substr(0, word.size() - 3));
         }},
    };
    return apply_rules(word, rules);
}

std::string step3(std::string_view w) {
    return apply_rules(w, {{"icate", "ic", positive_measure},
                           {"ative", "", positive_measure},
                           {"alize", "al", positive_measure},
                           {"iciti", "ic", positive_measure},
                           {"ical", "ic", positive_measure},
                           {"ful", "", positive_measure},
                           {"ness", "", positive_measure}});
}

std::string step4(std::string_view w) {
    return apply_rules(w, {{"al", "", measure_above_one},
                           {"ance", "", measure_above_one},
                           {"ence", "", measure_above_one},
                           {"er", "", measure_above_one},
                           {"ic", "", measure_above_one},
                           {"able", "", measure_above_one},
                           {"ible", "", measure_above_one},
                           {"ant", "", measure_above_one},
                           {"ement", "", measure_above_one},
                           {"ment", "", measure_above_one},
                           {"ent", "", measure_above_one},
                           {"ion", "", [](std::string_view stem) {
                                return measure(stem) > 1 && (stem.back() == 's' || stem.back() == 't');
                            }},
                           {"ou", "", measure_above_one},
                           {"ism", "", measure_above_one},
                           {"ate", "", measure_above_one},
                           {"iti", "", measure_above_one},
                           {"ous", "", measure_above_one},
                           {"ive", "", measure_above_one},
                           {"ize", "", measure_above_one}});
}

std::string step5a(std::string_view w) {
    if (ends_with(w, "e")) {
        auto stem = w.substr(0, w.size() - 1);
        const int m = measure(stem);
        if (m > 1) return std::string(stem);
        if (m == 1 && !ends_cvc(stem)) return std::string(stem);
    }
    return std::string(w);
}

std::string step5b(std::string_view w) {
    const std::string word(w);
    return apply_rules(word, {{"ll", "l", [&word](std::string_view) {
                                   return measure(std::string_view(word).substr(0, word.size() - 1)) > 1;
                               }}});
}

const std::unordered_map<std::string_view, std::string_view>& irregular_forms() {
    static const std::unordered_map<std::string_view, std::string_view> forms = {
        {"sky", "sky"},         {"skies", "sky"},      {"dying", "die"},       {"lying", "lie"},
        {"tying", "tie"},       {"news", "news"},      {"innings", "inning"},  {"inning", "inning"},
        {"outings", "outing"},  {"outing", "outing"},  {"cannings", "canning"}, {"canning", "canning"},
        {"howe", "howe"},       {"proceed", "proceed"}, {"exceed", "exceed"},  {"succeed", "succeed"},
    };
    return forms;
}

} // namespace

std::string porter_stem(std::string_view word) {
    if (auto it = irregular_forms().find(word); it != irregular_forms().end()) return std::string(it->second);
    if (word.size() <= 2) return std::string(word);

    auto w = step1a(word);
    w = step1b(w);
    w = step1c(w);
    w = step2(w);
    w = step3(w);
    w = step4(w);
    w = step5a(w);
    w = step5b(w);
    return w;
}

} // namespace lfqa
