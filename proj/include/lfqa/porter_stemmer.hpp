#pragma once

#include <string>
#include <string_view>

namespace lfqa {

/// Porter stemmer with the NLTK extensions (NLTK's default mode, which is
/// what rouge-score's stemming tokenizer uses). Expects a lowercase ASCII
/// token.
std::string porter_stem(std::string_view word);

} // namespace lfqa
