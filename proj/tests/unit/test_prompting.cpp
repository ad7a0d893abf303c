#include "support.hpp"

#include "lfqa/data_io.hpp"
#include "lfqa/error.hpp"
#include "lfqa/prompting.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace lfqa;

namespace {

const ExemplarPool& figures() {
    static const auto pool = load_pool(test::fixture("figure_exemplars.jsonl"), false);
    return pool;
}

PromptSpec figure_spec(const std::string& id, DatasetKind target, RefinementMode mode) {
    PromptSpec spec;
    spec.instruction = std::string(instruction_for(target));
    spec.exemplars = {*figures().find(id)};
    spec.mode = mode;
    if (mode == RefinementMode::af_oracle_disambig) spec.oracle_questions = std::vector<std::string>{};
    return spec;
}

Exemplar small(std::string id, QuestionType t = QuestionType::conditional) {
    Exemplar ex;
    ex.id = std::move(id);
    ex.question = "Question for " + ex.id + "?";
    ex.qtype = t;
    ex.facets = {{"year", std::nullopt, {"1999"}}};
    ex.long_answer = "It was in 1999 for " + ex.id + ".";
    return ex;
}

} // namespace

TEST_CASE("rendering matches every golden template") {
    struct Case {
        const char* file;
        const char* id;
        DatasetKind target;
        RefinementMode mode;
    };
    const Case cases[] = {
        {"figure2_asqa_af.txt", "asqa-fig2", DatasetKind::asqa, RefinementMode::af},
        {"figure3_aquamuse_af.txt", "aqm-fig3", DatasetKind::aquamuse, RefinementMode::af},
        {"figure4_asqa_af_oracle_disambig.txt", "asqa-fig2", DatasetKind::asqa, RefinementMode::af_oracle_disambig},
        {"asqa_none.txt", "asqa-fig2", DatasetKind::asqa, RefinementMode::none},
        {"asqa_nl.txt", "asqa-fig2", DatasetKind::asqa, RefinementMode::nl},
        {"asqa_qa.txt", "asqa-fig2", DatasetKind::asqa, RefinementMode::qa},
        {"aquamuse_none.txt", "aqm-fig3", DatasetKind::aquamuse, RefinementMode::none},
        {"aquamuse_nl.txt", "aqm-fig3", DatasetKind::aquamuse, RefinementMode::nl},
        {"aquamuse_qa.txt", "aqm-fig3", DatasetKind::aquamuse, RefinementMode::qa},
    };
    for (const auto& c : cases) {
        INFO(c.file);
        CHECK(render_prompt(figure_spec(c.id, c.target, c.mode)) == test::read_file(test::golden(c.file)));
    }
}

TEST_CASE("query cue and oracle questions") {
    auto spec = figure_spec("asqa-fig2", DatasetKind::asqa, RefinementMode::af);
    spec.query = "Who wrote Dune?";
    auto text = render_prompt(spec);
    CHECK(text.ends_with("\n\nQuestion: Who wrote Dune?\n"));

    auto oracle = figure_spec("asqa-fig2", DatasetKind::asqa, RefinementMode::af_oracle_disambig);
    oracle.query = "Who wrote Dune?";
    oracle.oracle_questions = std::vector<std::string>{"Who wrote the novel Dune?", "Who wrote the film Dune?"};
    auto otext = render_prompt(oracle);
    CHECK(otext.find("Question: Who wrote Dune?\nDisambiguated Questions:\nQ: Who wrote the novel Dune?\n"
                     "Q: Who wrote the film Dune?\n") != std::string::npos);

    oracle.oracle_questions.reset();
    CHECK_THROWS_AS(render_prompt(oracle), config_error);
}

TEST_CASE("mixed pools keep each exemplar's native block header") {
    PromptSpec spec;
    spec.instruction = std::string(instruction_for(DatasetKind::aquamuse));
    spec.exemplars = figures().exemplars();
    spec.mode = RefinementMode::af;
    auto text = render_prompt(spec);
    CHECK(text.find("Disambiguations:\n- band: AC/DC") != std::string::npos);
    CHECK(text.find("Details:\n- how the term originated") != std::string::npos);
    CHECK(text.find("Answer: \"It's a Long Way") != std::string::npos);
    CHECK(text.find("\n\nQuestion: where did the term") != std::string::npos);
}

TEST_CASE("nl mode needs explanations") {
    auto ex = small("no-nl");
    PromptSpec spec;
    spec.instruction = "Header.";
    spec.exemplars = {ex};
    spec.mode = RefinementMode::nl;
    try {
        render_prompt(spec);
        FAIL("expected data_error");
    } catch (const data_error& e) {
        CHECK(std::string(e.what()).find("no-nl") != std::string::npos);
    }
}

TEST_CASE("qa refinements synthesize missing questions") {
    auto ex = small("syn");
    CHECK(has_synthesized_questions(ex));
    auto qa = std::get<QaRefinement>(*refinement_of(ex, RefinementMode::qa));
    REQUIRE(qa.pairs.size() == 1);
    CHECK(qa.pairs[0] == QuestionAnswer{"year?", "1999"});
    CHECK_FALSE(refinement_of(ex, RefinementMode::none).has_value());

    FacetPair multi{"who", std::string("Who was it?"), {" Ann ", "Bob"}};
    CHECK(facet_answer_text(multi) == "Ann, Bob");
    CHECK(facet_question_text(multi) == "Who was it?");
}

TEST_CASE("parse_output cases") {
    auto af = parse_output("Disambiguations:\n- band: AC/DC\n- lead vocal: Bon Scott\nAnswer: A song by AC/DC.",
                           RefinementMode::af);
    REQUIRE(af.parse_ok);
    auto facets = std::get<AfRefinement>(*af.refinement).facets;
    CHECK(facets == std::vector<AnswerFacet>{{"band", "AC/DC"}, {"lead vocal", "Bon Scott"}});
    CHECK(af.answer == "A song by AC/DC.");

    auto none = parse_output("Some text without the marker", RefinementMode::af);
    CHECK_FALSE(none.parse_ok);
    CHECK(none.answer == none.raw);
    CHECK_FALSE(none.refinement.has_value());

    auto runaway = parse_output("Answer: First part.\nMore.\nQuestion: next one?\nAnswer: junk", RefinementMode::none);
    REQUIRE(runaway.parse_ok);
    CHECK(runaway.answer == "First part.\nMore.");
    CHECK_FALSE(runaway.refinement.has_value());

    auto qa = parse_output("Q: Which band? A: AC/DC\nQ: Which singer?\nA: Bon Scott\nAnswer: Both.", RefinementMode::qa);
    REQUIRE(qa.parse_ok);
    CHECK(std::get<QaRefinement>(*qa.refinement).pairs ==
          std::vector<QuestionAnswer>{{"Which band?", "AC/DC"}, {"Which singer?", "Bon Scott"}});

    CHECK_FALSE(parse_output("- broken facet\nAnswer: x", RefinementMode::af).parse_ok);
    CHECK_FALSE(parse_output("Answer: x", RefinementMode::af).parse_ok);
    CHECK_FALSE(parse_output("Answer: x", RefinementMode::nl).parse_ok);
    CHECK_FALSE(parse_output("Q: dangling\nAnswer: x", RefinementMode::qa).parse_ok);
    CHECK_FALSE(parse_output("", RefinementMode::none).parse_ok);

    auto nl = parse_output("It is ambiguous.\nAnswer: x", RefinementMode::nl);
    REQUIRE(nl.parse_ok);
    CHECK(std::get<NlRefinement>(*nl.refinement).text == "It is ambiguous.");

    // An answer marker after a runaway question does not count.
    CHECK_FALSE(parse_output("text\nQuestion: q\nAnswer: a", RefinementMode::none).parse_ok);
}

TEST_CASE("render then parse recovers the exemplar") {
    auto pool = load_pool(test::fixture("pool_asqa.jsonl"), false);
    for (const auto& ex : pool) {
        for (auto mode : {RefinementMode::none, RefinementMode::nl, RefinementMode::qa, RefinementMode::af,
                          RefinementMode::af_oracle_disambig}) {
            auto parsed = parse_output(render_exemplar_body(ex, mode), mode);
            REQUIRE(parsed.parse_ok);
            CHECK(parsed.answer == ex.long_answer);
            CHECK(parsed.refinement == refinement_of(ex, mode));
        }
    }
}

TEST_CASE("select_dynamic writes the most similar exemplar last") {
    auto pool = load_pool(test::fixture("pool_asqa.jsonl"), false);
    const auto& q = pool.exemplars()[42].question;
    auto ranked = rank_pool(q, pool, MetricKind::bm25, nullptr);

    CHECK(select_dynamic(q, pool, 0, MetricKind::bm25, nullptr).empty());
    auto five = select_dynamic(q, pool, 5, MetricKind::bm25, nullptr);
    REQUIRE(five.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(five[4 - i].id == ranked[i].exemplar->id);
    CHECK(five.back().id == pool.exemplars()[42].id);

    auto all = select_dynamic(q, pool, pool.size(), MetricKind::bm25, nullptr);
    for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i].id == ranked[ranked.size() - 1 - i].exemplar->id);
    CHECK_THROWS_AS(select_dynamic(q, pool, pool.size() + 1, MetricKind::bm25, nullptr), config_error);
}

TEST_CASE("select_diverse picks distinct types in taxonomy order") {
    auto pool = load_pool(test::fixture("pool_asqa.jsonl"), false);
    auto five = select_diverse(pool, 5, 11);
    REQUIRE(five.size() == 5);
    for (std::size_t i = 1; i < five.size(); ++i) CHECK(five[i - 1].qtype < five[i].qtype);
    CHECK(select_diverse(pool, 5, 11) == five);
    CHECK(select_diverse(pool, 1, 3).size() == 1);
    CHECK_THROWS_AS(select_diverse(pool, 6, 0), config_error);

    std::set<std::string> seen;
    for (std::uint64_t seed = 0; seed < 50; ++seed) seen.insert(select_diverse(pool, 5, seed)[0].id);
    CHECK(seen.size() > 5);
}

TEST_CASE("select_random is a seeded subset") {
    auto pool = load_pool(test::fixture("pool_asqa.jsonl"), false);
    auto a = select_random(pool, 5, 1), b = select_random(pool, 5, 1), c = select_random(pool, 5, 2);
    CHECK(a == b);
    CHECK(a != c);
    std::set<std::string> ids;
    for (const auto& e : a) ids.insert(e.id);
    CHECK(ids.size() == 5);

    auto perm = select_random(pool, pool.size(), 9);
    std::vector<std::string> x, y;
    for (const auto& e : perm) x.push_back(e.id);
    for (const auto& e : pool) y.push_back(e.id);
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    CHECK(x == y);
    CHECK_THROWS_AS(select_random(pool, pool.size() + 1, 0), config_error);
}

TEST_CASE("truncate_to_budget drops from the front") {
    PromptSpec spec;
    spec.instruction = "Answer these.";
    spec.mode = RefinementMode::none;
    spec.query = "What now?";
    for (int i = 0; i < 5; ++i) spec.exemplars.push_back(small("e" + std::to_string(i)));

    const auto full = whitespace_token_count(render_prompt(spec));
    CHECK(truncate_to_budget(spec, full, whitespace_token_count) == spec);

    auto three = spec;
    three.exemplars.erase(three.exemplars.begin(), three.exemplars.begin() + 2);
    const auto three_tokens = whitespace_token_count(render_prompt(three));
    auto cut = truncate_to_budget(spec, three_tokens, whitespace_token_count);
    REQUIRE(cut.exemplars.size() == 3);
    CHECK(cut.exemplars.front().id == "e2");
    CHECK(cut.query == spec.query);

    CHECK_THROWS_AS(truncate_to_budget(spec, 2, whitespace_token_count), config_error);
    CHECK(whitespace_token_count("a b\n c\t") == 3);
}
