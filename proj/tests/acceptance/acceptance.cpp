// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion names
// as arguments to run a subset; exits non-zero when any selected one fails.

#include "support.hpp"

#include "oracles/bm25_oracle.hpp"
#include "oracles/rouge_oracle.hpp"

#include "lfqa/data_io.hpp"
#include "lfqa/error.hpp"
#include "lfqa/metrics.hpp"
#include "lfqa/prompting.hpp"
#include "lfqa/rouge.hpp"
#include "lfqa/runner.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

using namespace lfqa;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string join_answers(const std::vector<std::string>& answers) {
    std::string out;
    for (const auto& a : answers) {
        auto b = a.find_first_not_of(" \t");
        auto e = a.find_last_not_of(" \t");
        if (!out.empty()) out += ", ";
        out += b == std::string::npos ? "" : a.substr(b, e - b + 1);
    }
    return out;
}

// (ROUGE-L, Disambig-F1, DR) as printed in the main results table and the
// ablation table.
const std::vector<std::array<double, 3>> dr_rows = {
    {31.1, 18.6, 24.0}, {31.3, 22.8, 26.7}, {33.6, 23.9, 28.3}, {32.3, 25.3, 28.6}, {34.5, 25.3, 29.6},
    {12.9, 7.7, 10.0},  {30.0, 17.1, 22.6}, {31.8, 25.0, 28.2}, {31.6, 23.4, 27.2}, {36.1, 25.0, 30.0},
    {36.7, 25.4, 30.6}, {31.0, 7.4, 15.1},  {36.5, 21.2, 27.9}, {38.8, 25.1, 31.2}, {39.2, 26.4, 32.1},
    {37.4, 27.8, 32.1}, {31.7, 23.2, 27.1}, {32.0, 23.7, 27.6}, {34.5, 25.3, 29.6}, {34.9, 24.6, 29.3},
    {35.0, 22.1, 27.8}, {33.9, 23.2, 28.0}, {34.6, 23.6, 28.6}, {33.2, 22.9, 27.6}, {32.5, 25.1, 28.6},
    {34.6, 25.1, 29.5}, {34.6, 24.4, 29.0}, {21.1, 9.2, 14.0},  {29.6, 10.0, 17.2}, {28.7, 14.5, 20.4},
    {32.4, 18.0, 24.1},
};

Outcome dr_consistency() {
    std::vector<std::string> bad;
    for (const auto& [r, d, printed] : dr_rows) {
        const double got = dr_score(r, d);
        if (std::abs(got - printed) > 0.1 + 1e-12) {
            bad.push_back(fmt::format("{}/{} -> {:.3f}, printed {}", r, d, got, printed));
        }
    }
    if (bad.empty()) return {true, fmt::format("{} rows within 0.1", dr_rows.size())};
    std::string detail = fmt::format("{} of {} rows off by more than 0.1:", bad.size(), dr_rows.size());
    for (const auto& b : bad) detail += " " + b + ";";
    return {false, detail};
}

Outcome rouge_oracle() {
    std::mt19937_64 rng(20221014);
    // Short tokens are neither stemmed nor split, so the texts tokenize to
    // exactly the generated sequences.
    const std::vector<std::string> vocab = {"a", "b", "c", "d", "e", "ab", "ba", "cd", "xyz", "the", "of", "in"};
    auto random_sents = [&](std::size_t max_total) {
        std::vector<oracle::Tokens> sents;
        std::size_t total = std::uniform_int_distribution<std::size_t>(0, max_total)(rng);
        while (total > 0) {
            std::size_t len = std::min<std::size_t>(total, 1 + rng() % 10);
            oracle::Tokens s;
            for (std::size_t i = 0; i < len; ++i) s.push_back(vocab[rng() % vocab.size()]);
            sents.push_back(s);
            total -= len;
        }
        return sents;
    };
    auto to_text = [](const std::vector<oracle::Tokens>& sents) {
        std::string out;
        for (const auto& s : sents) {
            if (!out.empty()) out += "\n";
            for (std::size_t i = 0; i < s.size(); ++i) out += (i ? " " : "") + s[i];
        }
        return out;
    };
    auto flat = [](const std::vector<oracle::Tokens>& sents) {
        oracle::Tokens out;
        for (const auto& s : sents) out.insert(out.end(), s.begin(), s.end());
        return out;
    };
    auto near = [](const RougeScore& a, const oracle::Prf& b) {
        return std::abs(a.precision - b.p) <= 1e-9 && std::abs(a.recall - b.r) <= 1e-9 &&
               std::abs(a.fmeasure - b.f) <= 1e-9;
    };

    std::size_t failures = 0;
    std::string first;
    for (int trial = 0; trial < 1000; ++trial) {
        auto t = random_sents(30), p = random_sents(30);
        const auto tt = to_text(t), pt = to_text(p);
        bool ok = near(rouge_lsum(tt, pt), oracle::rouge_lsum(t, p));
        for (int n : {1, 2}) ok = ok && near(rouge_n(tt, pt, n), oracle::rouge_n(flat(t), flat(p), n));
        if (!ok && failures++ == 0) first = fmt::format("trial {}: target '{}' prediction '{}'", trial, tt, pt);
    }
    if (failures == 0) return {true, "1000 pairs agree to 1e-9"};
    return {false, fmt::format("{} mismatches; first at {}", failures, first)};
}

Outcome golden_templates() {
    auto figures = load_pool(test::fixture("figure_exemplars.jsonl"), false);
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
    };
    std::vector<std::string> bad;
    for (const auto& c : cases) {
        PromptSpec spec;
        spec.instruction = std::string(instruction_for(c.target));
        spec.exemplars = {*figures.find(c.id)};
        spec.mode = c.mode;
        if (c.mode == RefinementMode::af_oracle_disambig) spec.oracle_questions = std::vector<std::string>{};
        if (render_prompt(spec) != test::read_file(test::golden(c.file))) bad.push_back(c.file);
    }
    if (bad.empty()) return {true, "figures 2, 3 and 4 byte-identical"};
    std::string detail = "differs:";
    for (const auto& b : bad) detail += " " + b;
    return {false, detail};
}

Outcome roundtrip() {
    auto pool = merge_pools({load_pool(test::fixture("pool_asqa.jsonl"), true),
                             load_pool(test::fixture("pool_aquamuse.jsonl"), true)});
    std::size_t checked = 0, failures = 0;
    std::string first;
    for (const auto& ex : pool) {
        std::vector<RefinementMode> modes = {RefinementMode::none, RefinementMode::qa, RefinementMode::af};
        if (ex.nl_explanation) modes.push_back(RefinementMode::nl);
        if (ex.source_dataset == DatasetKind::asqa) modes.push_back(RefinementMode::af_oracle_disambig);
        for (auto mode : modes) {
            // Expected refinement built straight from the exemplar fields.
            std::optional<Refinement> expected;
            switch (mode) {
            case RefinementMode::none:
                break;
            case RefinementMode::nl:
                expected = NlRefinement{*ex.nl_explanation};
                break;
            case RefinementMode::qa: {
                QaRefinement qa;
                for (const auto& f : ex.facets) {
                    qa.pairs.push_back({f.question ? *f.question : f.label + "?", join_answers(f.answers)});
                }
                expected = qa;
                break;
            }
            case RefinementMode::af:
            case RefinementMode::af_oracle_disambig: {
                AfRefinement af;
                for (const auto& f : ex.facets) af.facets.push_back({f.label, join_answers(f.answers)});
                expected = af;
                break;
            }
            }
            auto parsed = parse_output(render_exemplar_body(ex, mode), mode);
            ++checked;
            if (!parsed.parse_ok || parsed.answer != ex.long_answer || parsed.refinement != expected) {
                if (failures++ == 0) first = ex.id + " in mode " + std::string(to_string(mode));
            }
        }
    }
    if (pool.size() != 120) return {false, fmt::format("expected 120 pool exemplars, found {}", pool.size())};
    if (failures == 0) return {true, fmt::format("{} exemplars, {} renderings recovered", pool.size(), checked)};
    return {false, fmt::format("{} of {} renderings differ; first: {}", failures, checked, first)};
}

Outcome selection_invariants() {
    std::mt19937_64 rng(99);
    const std::vector<std::string> words = {"who", "sang", "the", "song", "when", "was", "it", "built", "car", "first"};
    auto question = [&] {
        std::string q;
        const auto n = 1 + rng() % 5;
        for (std::size_t i = 0; i < n; ++i) q += (i ? " " : "") + words[rng() % words.size()];
        return q + "?";
    };
    std::size_t failures = 0;
    std::string first;
    auto fail = [&](int trial, const std::string& what) {
        if (failures++ == 0) first = fmt::format("trial {}: {}", trial, what);
    };

    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t n = 1 + rng() % 15;
        std::vector<Exemplar> exs;
        std::set<std::string> ids;
        while (exs.size() < n) {
            Exemplar ex;
            ex.id = fmt::format("x{:03d}", rng() % 500);
            if (!ids.insert(ex.id).second) continue;
            ex.question = question();
            ex.qtype = all_question_types[rng() % 5];
            ex.facets = {{"f", std::nullopt, {"a"}}};
            ex.long_answer = "a.";
            exs.push_back(ex);
        }
        std::shuffle(exs.begin(), exs.end(), rng);
        ExemplarPool pool(exs);
        const auto q = question();

        auto ranked = rank_pool(q, pool, MetricKind::bm25, nullptr);
        std::multiset<std::string> got_ids;
        for (const auto& r : ranked) got_ids.insert(r.exemplar->id);
        if (ranked.size() != n || got_ids != std::multiset<std::string>(ids.begin(), ids.end())) {
            fail(trial, "ranking is not a permutation of the pool");
        }
        for (std::size_t i = 1; i < ranked.size(); ++i) {
            const auto& a = ranked[i - 1];
            const auto& b = ranked[i];
            if (!(a.score > b.score || (a.score == b.score && a.exemplar->id < b.exemplar->id))) {
                fail(trial, "ranking not sorted by score then id");
            }
        }

        const std::size_t k = rng() % (n + 1);
        auto chosen = select_dynamic(q, pool, k, MetricKind::bm25, nullptr);
        if (chosen.size() != k) fail(trial, "select_dynamic returned the wrong count");
        for (std::size_t i = 0; i < chosen.size(); ++i) {
            if (chosen[i].id != ranked[k - 1 - i].exemplar->id) fail(trial, "select_dynamic is not the reversed top k");
        }

        const auto types = pool.counts_by_type().size();
        const std::size_t dk = 1 + rng() % types;
        auto diverse = select_diverse(pool, dk, rng());
        std::set<QuestionType> seen;
        for (const auto& e : diverse) seen.insert(e.qtype);
        if (diverse.size() != dk || seen.size() != dk) fail(trial, "select_diverse repeated a type");
    }
    if (failures == 0) return {true, "10000 trials"};
    return {false, fmt::format("{} violations; first {}", failures, first)};
}

Outcome bm25_oracle() {
    std::mt19937_64 rng(5);
    std::vector<std::string> vocab;
    for (int i = 0; i < 40; ++i) vocab.push_back("w" + std::to_string(i));
    std::vector<std::vector<std::string>> corpus(50);
    for (auto& doc : corpus) {
        doc.resize(1 + rng() % 15);
        for (auto& t : doc) t = vocab[rng() % 25];
    }
    auto stats = Bm25CorpusStats::from_documents(corpus);
    double worst = 0;
    for (int q = 0; q < 500; ++q) {
        std::vector<std::string> query(1 + rng() % 6);
        for (auto& t : query) t = vocab[rng() % vocab.size()];
        for (const auto& doc : corpus) {
            worst = std::max(worst, std::abs(bm25_score(query, doc, stats) - oracle::bm25(query, doc, corpus)));
        }
    }
    return {worst <= 1e-9, fmt::format("500 queries x 50 docs, max deviation {:.3g}", worst)};
}

Outcome end_to_end() {
    test::TempDir dir;
    auto cfg = load_run_config(test::fixture("asqa_af.conf"));

    cfg.output_dir = dir / "first";
    auto first = run_experiment(cfg);
    const auto bytes = test::read_file(cfg.output_dir / "report.jsonl");

    cfg.output_dir = dir / "second";
    run_experiment(cfg);
    const bool same_fresh = test::read_file(cfg.output_dir / "report.jsonl") == bytes;

    cfg.output_dir = dir / "resumed";
    auto replay = ReplayEndpoint::load(test::fixture("asqa_replay.jsonl"));
    std::atomic<int> calls{0};
    FunctionEndpoint failing([&](const GenerationRequest& req) {
        if (++calls > 9) throw endpoint_error("simulated outage");
        return replay.complete(req);
    });
    Services services;
    services.model = &failing;
    bool interrupted = false;
    try {
        run_experiment(cfg, services);
    } catch (const endpoint_error&) {
        interrupted = true;
    }
    run_experiment(cfg);
    const bool same_resumed = test::read_file(cfg.output_dir / "report.jsonl") == bytes;

    const auto& a = first.aggregate;
    const bool columns = a.examples == 20 && a.words > 0 && a.rougeL && a.disambig_f1 && a.dr;
    const bool pass = same_fresh && interrupted && same_resumed && columns;
    return {pass, fmt::format("fresh rerun identical: {}, interrupted: {}, resumed identical: {}, "
                              "ASQA columns present: {} (#Words {:.1f}, ROUGE-L {:.1f}, Disambig-F1 {:.1f}, DR {:.1f})",
                              same_fresh, interrupted, same_resumed, columns, a.words, a.rougeL.value_or(-1),
                              a.disambig_f1.value_or(-1), a.dr.value_or(-1))};
}

Outcome disambig_stub_suite() {
    const std::vector<QaPair> qa = {{"Which band sang it's a long way to the top?", {"AC/DC"}},
                                    {"Who was the lead vocal of it's a long way to the top?", {"Bon Scott"}}};
    SubstringStubRc rc(qa);
    const double both = disambig_f1("The song is by AC/DC and was sung by Bon Scott.", qa, rc);
    const double one = disambig_f1("The song is by AC/DC.", qa, rc);
    const double none = disambig_f1("Nobody remembers the song.", qa, rc);
    return {both == 100.0 && one == 50.0 && none == 0.0, fmt::format("scores {}, {}, {}", both, one, none)};
}

} // namespace

int main(int argc, char** argv) {
    spdlog::set_level(spdlog::level::off);
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"dr_consistency", dr_consistency},
        {"rouge_oracle", rouge_oracle},
        {"golden_templates", golden_templates},
        {"roundtrip", roundtrip},
        {"selection_invariants", selection_invariants},
        {"bm25_oracle", bm25_oracle},
        {"end_to_end_determinism", end_to_end},
        {"disambig_stub_suite", disambig_stub_suite},
    };
    std::set<std::string> only(argv + 1, argv + argc);
    for (const auto& name : only) {
        if (std::none_of(criteria.begin(), criteria.end(), [&](const auto& c) { return c.first == name; })) {
            std::cerr << "unknown criterion " << name << "\n";
            return 2;
        }
    }

    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        if (!only.empty() && !only.count(name)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
        std::cout << fmt::format("{} {} ({} ms): {}\n", o.pass ? "PASS" : "FAIL", name, ms.count(), o.detail);
        failed += !o.pass;
    }
    return failed ? 1 : 0;
}
