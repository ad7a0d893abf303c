#include "support.hpp"

#include "lfqa/error.hpp"
#include "lfqa/metrics.hpp"
#include "lfqa/rc_client.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <atomic>
#include <cmath>

using namespace lfqa;

namespace {

const std::vector<QaPair> two_questions = {
    {"Which band sang it?", {"AC/DC"}},
    {"Who was the lead vocal?", {"Bon Scott", "Ronald Belford Scott"}},
};

class CountingRc final : public ReadingComprehension {
public:
    std::atomic<int> calls{0};
    RcAnswer answer(const std::string&, const std::string&) override {
        ++calls;
        return {"x", false, 1.0};
    }
    std::string describe() const override { return "counting"; }
};

} // namespace

TEST_CASE("answer normalization and token F1") {
    CHECK(normalize_answer("The  Beatles, (band)!") == std::vector<std::string>{"beatles", "band"});
    CHECK(normalize_answer("a an the").empty());
    CHECK(token_f1("June 13, 1935", "1935") == doctest::Approx(0.5));
    CHECK(token_f1("Bon Scott", "bon scott.") == 1.0);
    CHECK(token_f1("", "") == 1.0);
    CHECK(token_f1("x", "") == 0.0);
    CHECK(token_f1("cat cat", "cat") == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("text-level rouge scores") {
    CHECK(rouge_lsum_score("a b c d", "a b c d") == doctest::Approx(100.0));
    CHECK(rouge_lsum_score("a b c d", "a c b d") == doctest::Approx(75.0));
    CHECK(rouge_n_score("x y", "y z", 1) == doctest::Approx(50.0));
    CHECK(rouge_n_score("x", "x y", 2) == 0.0);
    CHECK_THROWS_AS(rouge_n_score("x", "x", 3), config_error);

    // Sentences are split before the summary-level LCS.
    const std::string ref = "Alpha beta gamma. Delta epsilon.";
    CHECK(rouge_lsum_score("Delta epsilon. Alpha beta gamma.", ref) == doctest::Approx(100.0));

    const std::vector<std::string> refs = {"nothing shared", "a b c d"};
    CHECK(max_over_refs(rouge_lsum_score, "a b c d", refs) == doctest::Approx(100.0));
    CHECK_THROWS_AS(max_over_refs(rouge_lsum_score, "a", {}), data_error);
}

TEST_CASE("dr is the geometric mean") {
    CHECK(dr_score(0, 50) == 0.0);
    CHECK(dr_score(40, 40) == doctest::Approx(40.0));
    CHECK(dr_score(100, 100) == doctest::Approx(100.0));
    CHECK(dr_score(34.5, 25.3) == doctest::Approx(std::sqrt(34.5 * 25.3)));
    CHECK(dr_score(30, 20) < dr_score(31, 20));
    CHECK(dr_score(30, 20) < dr_score(30, 21));
    CHECK(dr_score(20, 30) == doctest::Approx(dr_score(30, 20)));
    CHECK_THROWS_AS(dr_score(-1, 10), config_error);
    CHECK_THROWS_AS(dr_score(10, 100.5), config_error);
}

TEST_CASE("word count splits on whitespace") {
    CHECK(word_count("a b  c") == 3);
    CHECK(word_count("") == 0);
    CHECK(word_count(" \n\t") == 0);
}

TEST_CASE("substring stub rc") {
    SubstringStubRc rc(two_questions);
    auto a = rc.answer("Which band sang it?", "It was AC/DC in 1975.");
    CHECK_FALSE(a.no_answer);
    CHECK(a.text == "AC/DC");
    auto b = rc.answer("Who was the lead vocal?", "Sung by Ronald Belford Scott.");
    CHECK(b.text == "Ronald Belford Scott");
    CHECK(rc.answer("Who was the lead vocal?", "Nobody.").no_answer);
    CHECK(rc.answer("Unknown question?", "AC/DC").no_answer);
    CHECK(rc.describe() == "stub");
}

TEST_CASE("disambig f1 stub suite") {
    SubstringStubRc rc(two_questions);
    CHECK(disambig_f1("AC/DC recorded it and Bon Scott sang it.", two_questions, rc) == 100.0);
    CHECK(disambig_f1("AC/DC recorded it.", two_questions, rc) == 50.0);
    CHECK(disambig_f1("Nobody knows.", two_questions, rc) == 0.0);

    // Appending more gold answers never lowers the score.
    double prev = 0;
    std::string ctx = "Intro.";
    for (const auto& add : {" Filler.", " AC/DC.", " More filler.", " Bon Scott."}) {
        ctx += add;
        const double s = disambig_f1(ctx, two_questions, rc);
        CHECK(s >= prev);
        prev = s;
    }
    CHECK(prev == 100.0);

    CHECK_THROWS_AS(disambig_f1("x", {}, rc), data_error);

    CountingRc counting;
    CHECK(disambig_f1("   ", two_questions, counting) == 0.0);
    CHECK(counting.calls == 0);
}

TEST_CASE("gold aggregation max versus mean") {
    // The stub answers "Bon Scott"; the second gold alias scores lower.
    const std::vector<QaPair> qa = {{"Who?", {"Bon Scott", "Bon"}}};
    SubstringStubRc rc(qa);
    QaScoringOptions mean;
    mean.aggregation = GoldAggregation::mean;
    CHECK(disambig_f1("Bon Scott sang.", qa, rc) == doctest::Approx(100.0));
    CHECK(disambig_f1("Bon Scott sang.", qa, rc, mean) == doctest::Approx((100.0 + 100.0 * 2.0 / 3.0) / 2.0));
}

TEST_CASE("qaeval over external questions") {
    const std::vector<QaPair> questions = {{"q1", {"red"}}, {"q2", {"blue"}}};
    SubstringStubRc rc(questions);
    CHECK(qa_eval("red and blue", questions, rc) == 100.0);
    CHECK(qa_eval("only red", questions, rc) == 50.0);
}

TEST_CASE("evaluate_answer combines metrics per dataset shape") {
    DatasetExample ex;
    ex.id = "x";
    ex.question = "Who sang it?";
    ex.gold_long_answers = {"AC/DC sang it with Bon Scott.", "It was AC/DC."};
    ex.gold_qa_pairs = two_questions;
    SubstringStubRc rc(two_questions);

    auto s = evaluate_answer("AC/DC sang it with Bon Scott.", ex, &rc);
    CHECK(s.words == 6);
    CHECK(*s.rougeL == doctest::Approx(100.0));
    CHECK(*s.disambig_f1 == 100.0);
    CHECK(*s.dr == doctest::Approx(100.0));
    CHECK_FALSE(s.qaeval.has_value());

    EvalToggles no_rouge;
    no_rouge.rouge = false;
    auto t = evaluate_answer("AC/DC.", ex, &rc, no_rouge);
    CHECK_FALSE(t.rougeL.has_value());
    CHECK_FALSE(t.dr.has_value());
    CHECK(*t.disambig_f1 == 50.0);

    CHECK_THROWS_AS(evaluate_answer("x", ex, nullptr), config_error);
    EvalToggles rouge_only{true, false, false};
    CHECK_NOTHROW(evaluate_answer("x", ex, nullptr, rouge_only));
}

TEST_CASE("rc failures propagate") {
    class Failing final : public ReadingComprehension {
    public:
        RcAnswer answer(const std::string&, const std::string&) override { throw endpoint_error("rc down"); }
        std::string describe() const override { return "failing"; }
    } failing;
    CHECK_THROWS_AS(disambig_f1("AC/DC", two_questions, failing), endpoint_error);
}

TEST_CASE("http rc client follows the wire contract") {
    test::LocalServer srv;
    nlohmann::json seen;
    srv.server.Post("/rc", [&](const httplib::Request& req, httplib::Response& res) {
        seen = nlohmann::json::parse(req.body);
        const auto ctx = seen.at("context").get<std::string>();
        if (ctx.find("1893") != std::string::npos) {
            // no_answer omitted: the question was answered.
            res.set_content(R"({"text": "1893", "confidence": 0.9})", "application/json");
        } else {
            res.set_content(R"({"text": "ignored", "no_answer": true, "confidence": 0.1})", "application/json");
        }
    });
    srv.server.Post("/broken", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"confidence": 0.5})", "application/json");
    });
    srv.start();

    HttpReadingComprehension rc(srv.url("/rc"), HttpOptions{});
    auto a = rc.answer("When was it built?", "It was built in 1893.");
    CHECK(seen["question"] == "When was it built?");
    CHECK(seen["context"] == "It was built in 1893.");
    CHECK_FALSE(a.no_answer);
    CHECK(token_f1(a.text, "1893") == 1.0);
    CHECK(a.confidence == doctest::Approx(0.9));

    auto b = rc.answer("When?", "No dates here.");
    CHECK(b.no_answer);
    CHECK(b.text.empty());

    HttpReadingComprehension broken(srv.url("/broken"), HttpOptions{});
    CHECK_THROWS_AS(broken.answer("q", "c"), endpoint_error);

    const std::vector<QaPair> qa = {{"When was it built?", {"1893"}}};
    CHECK(disambig_f1("It was built in 1893.", qa, rc) == 100.0);
}
