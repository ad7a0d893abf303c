#include "lfqa/rc_client.hpp"

#include "http_util.hpp"
#include "lfqa/error.hpp"

#include <algorithm>

namespace lfqa {

HttpReadingComprehension::HttpReadingComprehension(std::string url, HttpOptions opts)
    : url_(std::move(url)), opts_(std::move(opts)) {
    detail::parse_http_url(url_);
}

RcAnswer HttpReadingComprehension::answer(const std::string& question, const std::string& context) {
    nlohmann::json body = {{"question", question}, {"context", context}};
    auto res = detail::post_json(detail::parse_http_url(url_), body, opts_);
    if (!res.is_object()) throw endpoint_error("RC response from " + url_ + " is not an object");

    RcAnswer out;
    if (auto it = res.find("no_answer"); it != res.end() && !it->is_null()) {
        if (!it->is_boolean()) throw endpoint_error("RC response from " + url_ + " has a non-boolean no_answer");
        out.no_answer = it->get<bool>();
    }
    if (auto it = res.find("confidence"); it != res.end() && !it->is_null()) {
        if (!it->is_number()) throw endpoint_error("RC response from " + url_ + " has a non-numeric confidence");
        out.confidence = it->get<double>();
    }
    auto it = res.find("text");
    if (it != res.end() && !it->is_null()) {
        if (!it->is_string()) throw endpoint_error("RC response from " + url_ + " has a non-string text");
        out.text = it->get<std::string>();
    } else if (!out.no_answer) {
        throw endpoint_error("RC response from " + url_ + " lacks \"text\"");
    }
    if (out.no_answer) out.text.clear();
    return out;
}

SubstringStubRc::SubstringStubRc(const std::vector<QaPair>& table) {
    for (const auto& qa : table) {
        auto& known = answers_[qa.question];
        for (const auto& a : qa.answers) {
            if (std::find(known.begin(), known.end(), a) == known.end()) known.push_back(a);
        }
    }
}

SubstringStubRc SubstringStubRc::from_examples(const std::vector<DatasetExample>& examples) {
    std::vector<QaPair> table;
    for (const auto& ex : examples) {
        table.insert(table.end(), ex.gold_qa_pairs.begin(), ex.gold_qa_pairs.end());
        table.insert(table.end(), ex.eval_questions.begin(), ex.eval_questions.end());
    }
    return SubstringStubRc(table);
}

RcAnswer SubstringStubRc::answer(const std::string& question, const std::string& context) {
    auto it = answers_.find(question);
    if (it != answers_.end()) {
        for (const auto& a : it->second) {
            if (!a.empty() && context.find(a) != std::string::npos) return {a, false, 1.0};
        }
    }
    return {"", true, 0.0};
}

} // namespace lfqa
