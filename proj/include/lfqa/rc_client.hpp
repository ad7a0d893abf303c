#pragma once

#include "lfqa/http_options.hpp"
#include "lfqa/types.hpp"

#include <string>
#include <unordered_map>
#include <vector>

namespace lfqa {

struct RcAnswer {
    std::string text;       // empty when no_answer
    bool no_answer = false;
    double confidence = 0.0;
};

/// Extractive reading comprehension with SQuAD 2.0 style no-answer support.
/// Implementations must be safe to call from several threads.
class ReadingComprehension {
public:
    virtual ~ReadingComprehension() = default;
    virtual RcAnswer answer(const std::string& question, const std::string& context) = 0;
    virtual std::string describe() const = 0;
};

/// Wire contract: POST {"question","context"} -> {"text","no_answer","confidence"}.
/// A missing no_answer flag means the question was answered.
class HttpReadingComprehension final : public ReadingComprehension {
public:
    explicit HttpReadingComprehension(std::string url, HttpOptions opts = HttpOptions::from_env());
    RcAnswer answer(const std::string& question, const std::string& context) override;
    std::string describe() const override { return url_; }

private:
    std::string url_;
    HttpOptions opts_;
};

/// Deterministic offline RC: for a known question, returns the first gold
/// answer that occurs verbatim in the context, otherwise no_answer.
class SubstringStubRc final : public ReadingComprehension {
public:
    explicit SubstringStubRc(const std::vector<QaPair>& table);
    static SubstringStubRc from_examples(const std::vector<DatasetExample>& examples);

    RcAnswer answer(const std::string& question, const std::string& context) override;
    std::string describe() const override { return "stub"; }

private:
    std::unordered_map<std::string, std::vector<std::string>> answers_;
};

} // namespace lfqa
