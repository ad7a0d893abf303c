#include "lfqa/runner.hpp"

#include "lfqa/data_io.hpp"
#include "lfqa/digest.hpp"
#include "lfqa/error.hpp"
#include "lfqa/prompting.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <memory>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

namespace lfqa {

using json = nlohmann::ordered_json;

namespace {

constexpr std::string_view replay_prefix = "replay:";
constexpr const char* checkpoint_file = "checkpoint.jsonl";
constexpr const char* report_file = "report.jsonl";

// ---------------------------------------------------------------------------
// Inputs and services

struct Inputs {
    std::vector<DatasetExample> dataset;
    ExemplarPool pool;
};

ExemplarPool subsample_pool(const ExemplarPool& pool, std::size_t n, std::uint64_t seed) {
    if (n == 0) return pool;
    if (n > pool.size()) {
        throw config_error(fmt::format("pool_size {} exceeds the pool's {} exemplars", n, pool.size()));
    }
    std::vector<std::size_t> idx(pool.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(n);
    std::sort(idx.begin(), idx.end());
    std::vector<Exemplar> picked;
    for (auto i : idx) picked.push_back(pool.exemplars()[i]);
    return ExemplarPool(std::move(picked));
}

Inputs load_inputs(const RunConfig& cfg) {
    Inputs in;
    in.dataset = load_dataset(cfg.dataset, cfg.dataset_kind);
    std::vector<ExemplarPool> pools;
    for (const auto& p : cfg.pools) pools.push_back(load_pool(p, cfg.strict_pools));
    in.pool = subsample_pool(merge_pools(pools), cfg.pool_size, cfg.pool_seed);
    return in;
}

struct ResolvedServices {
    std::unique_ptr<CompletionEndpoint> own_model;
    std::unique_ptr<ReadingComprehension> own_rc;
    std::unique_ptr<SimilarityClient> own_similarity;
    Services view;
};

bool needs_similarity(const RunConfig& cfg) {
    return cfg.selection == SelectionKind::dynamic && cfg.metric == MetricKind::embedding_greedy_f1;
}

void resolve_similarity(const RunConfig& cfg, const Services& given, ResolvedServices& out) {
    out.view.similarity = given.similarity;
    if (!out.view.similarity && needs_similarity(cfg)) {
        if (cfg.similarity.empty()) throw config_error("the embedding metric needs a similarity endpoint");
        out.own_similarity = std::make_unique<HttpSimilarityClient>(cfg.similarity);
        out.view.similarity = out.own_similarity.get();
    }
}

ResolvedServices resolve_services(const RunConfig& cfg, const Services& given,
                                  const std::vector<DatasetExample>& dataset) {
    ResolvedServices out;
    out.view = given;
    if (!out.view.model) {
        if (cfg.model.rfind(replay_prefix, 0) == 0) {
            out.own_model.reset(new ReplayEndpoint(ReplayEndpoint::load(cfg.model.substr(replay_prefix.size()))));
        } else {
            out.own_model = std::make_unique<HttpCompletionEndpoint>(cfg.model);
        }
        out.view.model = out.own_model.get();
    }
    if (!out.view.rc) {
        if (cfg.rc == "stub") {
            out.own_rc = std::make_unique<SubstringStubRc>(SubstringStubRc::from_examples(dataset));
        } else {
            out.own_rc = std::make_unique<HttpReadingComprehension>(cfg.rc);
        }
        out.view.rc = out.own_rc.get();
    }
    resolve_similarity(cfg, given, out);
    return out;
}

std::vector<std::optional<std::uint64_t>> seed_passes(const RunConfig& cfg) {
    std::vector<std::optional<std::uint64_t>> passes;
    if (cfg.selection == SelectionKind::dynamic) {
        passes.emplace_back();
    } else if (cfg.seeds.empty()) {
        passes.emplace_back(0);
    } else {
        for (auto s : cfg.seeds) passes.emplace_back(s);
    }
    return passes;
}

// ---------------------------------------------------------------------------
// Prompt construction

PreparedPrompt prepare_one(const RunConfig& cfg, const ExemplarPool& pool, const DatasetExample& ex,
                           std::optional<std::uint64_t> seed, SimilarityClient* similarity) {
    PreparedPrompt out;
    out.example_id = ex.id;
    out.seed = seed;

    std::vector<Exemplar> kept;
    for (const auto& e : pool) {
        if (e.question == ex.question) {
            ++out.excluded;
            spdlog::info("example {}: excluding pool exemplar {} (same question)", ex.id, e.id);
        } else {
            kept.push_back(e);
        }
    }
    const ExemplarPool candidates = out.excluded ? ExemplarPool(std::move(kept)) : pool;
    if (candidates.size() < cfg.k) {
        throw config_error(fmt::format("example {}: k = {} but only {} candidate exemplars", ex.id, cfg.k,
                                       candidates.size()));
    }

    PromptSpec spec;
    spec.instruction = std::string(instruction_for(cfg.dataset_kind));
    spec.mode = cfg.mode;
    spec.query = ex.question;
    switch (cfg.selection) {
    case SelectionKind::dynamic: {
        RankOptions opts;
        opts.parallelism = cfg.parallelism;
        spec.exemplars = select_dynamic(ex.question, candidates, cfg.k, *cfg.metric, similarity, opts);
        break;
    }
    case SelectionKind::random: spec.exemplars = select_random(candidates, cfg.k, seed.value_or(0)); break;
    case SelectionKind::diverse: spec.exemplars = select_diverse(candidates, cfg.k, seed.value_or(0)); break;
    }
    if (cfg.mode == RefinementMode::af_oracle_disambig) {
        std::vector<std::string> qs;
        for (const auto& qa : ex.gold_qa_pairs) qs.push_back(qa.question);
        spec.oracle_questions = std::move(qs);
    }
    spec = truncate_to_budget(std::move(spec), cfg.token_budget, whitespace_token_count);
    for (const auto& e : spec.exemplars) out.exemplar_ids.push_back(e.id);
    out.prompt = render_prompt(spec);
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

void put_optional(json& j, const char* key, const std::optional<double>& v) {
    if (v) j[key] = *v;
}

std::optional<double> get_optional(const json& j, const char* key) {
    if (auto it = j.find(key); it != j.end() && !it->is_null()) return it->get<double>();
    return std::nullopt;
}

json scores_to_json(const EvalScores& s) {
    json j;
    j["words"] = s.words;
    put_optional(j, "rouge1", s.rouge1);
    put_optional(j, "rouge2", s.rouge2);
    put_optional(j, "rougeL", s.rougeL);
    put_optional(j, "disambig_f1", s.disambig_f1);
    put_optional(j, "dr", s.dr);
    put_optional(j, "qaeval", s.qaeval);
    return j;
}

EvalScores scores_from_json(const json& j) {
    EvalScores s;
    s.words = j.at("words").get<double>();
    s.rouge1 = get_optional(j, "rouge1");
    s.rouge2 = get_optional(j, "rouge2");
    s.rougeL = get_optional(j, "rougeL");
    s.disambig_f1 = get_optional(j, "disambig_f1");
    s.dr = get_optional(j, "dr");
    s.qaeval = get_optional(j, "qaeval");
    return s;
}

json record_to_json(const ExampleRecord& r) {
    json j;
    j["type"] = "example";
    j["id"] = r.example_id;
    if (r.seed) j["seed"] = *r.seed;
    j["prompt_digest"] = r.prompt_digest;
    j["request_digest"] = r.request_digest;
    j["exemplars"] = r.exemplar_ids;
    j["excluded"] = r.excluded;
    j["parse_ok"] = r.parse_ok;
    j["empty_completion"] = r.empty_completion;
    j["answer"] = r.answer;
    j["scores"] = scores_to_json(r.scores);
    return j;
}

ExampleRecord record_from_json(const json& j) {
    ExampleRecord r;
    r.example_id = j.at("id").get<std::string>();
    if (j.contains("seed")) r.seed = j["seed"].get<std::uint64_t>();
    r.prompt_digest = j.at("prompt_digest").get<std::string>();
    r.request_digest = j.at("request_digest").get<std::string>();
    r.exemplar_ids = j.at("exemplars").get<std::vector<std::string>>();
    r.excluded = j.at("excluded").get<std::size_t>();
    r.parse_ok = j.at("parse_ok").get<bool>();
    r.empty_completion = j.at("empty_completion").get<bool>();
    r.answer = j.at("answer").get<std::string>();
    r.scores = scores_from_json(j.at("scores"));
    return r;
}

json row_to_json(const AggregateRow& row) {
    json j;
    j["examples"] = row.examples;
    j["words"] = row.words;
    put_optional(j, "rouge1", row.rouge1);
    put_optional(j, "rouge2", row.rouge2);
    put_optional(j, "rougeL", row.rougeL);
    put_optional(j, "disambig_f1", row.disambig_f1);
    put_optional(j, "dr", row.dr);
    put_optional(j, "qaeval", row.qaeval);
    return j;
}

AggregateRow row_from_json(const json& j) {
    AggregateRow row;
    row.examples = j.at("examples").get<std::size_t>();
    row.words = j.at("words").get<double>();
    row.rouge1 = get_optional(j, "rouge1");
    row.rouge2 = get_optional(j, "rouge2");
    row.rougeL = get_optional(j, "rougeL");
    row.disambig_f1 = get_optional(j, "disambig_f1");
    row.dr = get_optional(j, "dr");
    row.qaeval = get_optional(j, "qaeval");
    return row;
}

std::string job_key(const std::string& id, const std::optional<std::uint64_t>& seed) {
    return seed ? id + "#" + std::to_string(*seed) : id;
}

// ---------------------------------------------------------------------------
// Aggregation helpers

template <typename T, typename Get>
std::optional<double> mean_of(const std::vector<T>& items, Get get) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& item : items) {
        if (auto v = get(item)) {
            sum += *v;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

void finish_row(AggregateRow& row) {
    row.dr.reset();
    if (row.rougeL && row.disambig_f1) row.dr = dr_score(*row.rougeL, *row.disambig_f1);
}

// ---------------------------------------------------------------------------
// Checkpoint

struct Checkpoint {
    std::map<std::string, ExampleRecord> done;
    std::ofstream out;
};

Checkpoint open_checkpoint(const std::filesystem::path& path, const std::string& digest) {
    Checkpoint cp;
    bool fresh = true;
    if (std::ifstream in(path); in) {
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty()) continue;
            json j;
            try {
                j = json::parse(line);
            } catch (const json::parse_error&) {
                // A torn final line from an interrupted write is dropped.
                spdlog::warn("{}:{}: ignoring unreadable checkpoint line", path.string(), line_no);
                continue;
            }
            if (j.value("type", "") == "checkpoint") {
                if (j.value("config_digest", "") != digest) {
                    throw config_error(path.string() +
                                       " was written for a different configuration; remove it or use another "
                                       "output_dir");
                }
                fresh = false;
            } else {
                auto rec = record_from_json(j);
                cp.done[job_key(rec.example_id, rec.seed)] = std::move(rec);
            }
        }
    }
    cp.out.open(path, std::ios::app | std::ios::binary);
    if (!cp.out) throw data_error("cannot write checkpoint " + path.string());
    if (fresh) {
        json head;
        head["type"] = "checkpoint";
        head["config_digest"] = digest;
        cp.out << head.dump() << '\n' << std::flush;
    }
    return cp;
}

struct Job {
    const DatasetExample* example;
    std::optional<std::uint64_t> seed;
};

ExampleRecord run_job(const RunConfig& cfg, const ExemplarPool& pool, const Job& job, const Services& services,
                      ResponseCache& cache) {
    auto prepared = prepare_one(cfg, pool, *job.example, job.seed, services.similarity);

    GenerationRequest req;
    req.model_id = cfg.model_id;
    req.prompt = prepared.prompt;
    req.max_new_tokens = cfg.max_new_tokens;
    req.temperature = cfg.temperature;
    req.stop_sequences = {std::string(stop_sequence)};
    auto gen = cached_generate(req, cfg.mode, *services.model, cache);

    ExampleRecord rec;
    rec.example_id = job.example->id;
    rec.seed = job.seed;
    rec.prompt_digest = sha256_hex(prepared.prompt);
    rec.request_digest = gen.request_digest;
    rec.exemplar_ids = std::move(prepared.exemplar_ids);
    rec.excluded = prepared.excluded;
    rec.latency = gen.latency;
    rec.cache_hit = gen.cache_hit;
    rec.empty_completion = trim(gen.raw_text).empty();
    rec.parse_ok = gen.parsed.parse_ok;
    rec.answer = rec.empty_completion ? std::string() : gen.parsed.answer;
    if (!rec.parse_ok && !rec.empty_completion) {
        spdlog::warn("example {}: could not parse the completion; scoring the raw text", rec.example_id);
    }

    QaScoringOptions qopts;
    qopts.aggregation = cfg.gold_aggregation;
    qopts.parallelism = cfg.parallelism;
    rec.scores = evaluate_answer(rec.answer, *job.example, services.rc, cfg.eval, qopts);
    return rec;
}

RunReport build_report(const RunConfig& cfg, const std::string& digest, std::vector<ExampleRecord> records) {
    RunReport report;
    report.name = cfg.name;
    report.dataset_kind = cfg.dataset_kind;
    report.config = config_echo(cfg);
    report.config_digest = digest;

    std::sort(records.begin(), records.end(), [](const ExampleRecord& a, const ExampleRecord& b) {
        if (a.example_id != b.example_id) return a.example_id < b.example_id;
        return a.seed < b.seed;
    });
    for (const auto& pass : seed_passes(cfg)) {
        std::vector<const ExampleRecord*> group;
        for (const auto& r : records) {
            if (r.seed == pass) group.push_back(&r);
        }
        report.per_seed.push_back({pass, aggregate_records(group)});
    }
    std::vector<AggregateRow> rows;
    for (const auto& s : report.per_seed) rows.push_back(s.row);
    report.aggregate = mean_rows(rows);
    for (const auto& r : records) {
        if (r.empty_completion) {
            ++report.empty_completions;
        } else if (!r.parse_ok) {
            ++report.parse_failures;
        }
    }
    report.examples = std::move(records);
    return report;
}

std::string fmt_cell(const std::optional<double>& v) {
    return v ? fmt::format("{:.1f}", *v) : "-";
}

std::string grid_label(const std::vector<std::pair<std::string, std::string>>& cell, std::string_view sep) {
    std::vector<std::string> parts;
    for (const auto& [k, v] : cell) parts.push_back(k + "=" + v);
    return join(parts, sep);
}

} // namespace

// ---------------------------------------------------------------------------

AggregateRow aggregate_records(const std::vector<const ExampleRecord*>& records) {
    AggregateRow row;
    row.examples = records.size();
    if (records.empty()) return row;
    row.words = *mean_of(records, [](const ExampleRecord* r) { return std::optional<double>(r->scores.words); });
    row.rouge1 = mean_of(records, [](const ExampleRecord* r) { return r->scores.rouge1; });
    row.rouge2 = mean_of(records, [](const ExampleRecord* r) { return r->scores.rouge2; });
    row.rougeL = mean_of(records, [](const ExampleRecord* r) { return r->scores.rougeL; });
    row.disambig_f1 = mean_of(records, [](const ExampleRecord* r) { return r->scores.disambig_f1; });
    row.qaeval = mean_of(records, [](const ExampleRecord* r) { return r->scores.qaeval; });
    finish_row(row);
    return row;
}

AggregateRow mean_rows(const std::vector<AggregateRow>& rows) {
    AggregateRow row;
    if (rows.empty()) return row;
    row.examples = rows.front().examples;
    row.words = *mean_of(rows, [](const AggregateRow& r) { return std::optional<double>(r.words); });
    row.rouge1 = mean_of(rows, [](const AggregateRow& r) { return r.rouge1; });
    row.rouge2 = mean_of(rows, [](const AggregateRow& r) { return r.rouge2; });
    row.rougeL = mean_of(rows, [](const AggregateRow& r) { return r.rougeL; });
    row.disambig_f1 = mean_of(rows, [](const AggregateRow& r) { return r.disambig_f1; });
    row.qaeval = mean_of(rows, [](const AggregateRow& r) { return r.qaeval; });
    finish_row(row);
    return row;
}

std::vector<PreparedPrompt> prepare_prompts(const RunConfig& cfg, const Services& services) {
    validate(cfg);
    auto inputs = load_inputs(cfg);
    ResolvedServices resolved;
    resolve_similarity(cfg, services, resolved);
    std::vector<PreparedPrompt> out;
    for (const auto& pass : seed_passes(cfg)) {
        for (const auto& ex : inputs.dataset) {
            out.push_back(prepare_one(cfg, inputs.pool, ex, pass, resolved.view.similarity));
        }
    }
    return out;
}

RunReport run_experiment(const RunConfig& cfg, const Services& services) {
    validate(cfg);
    auto inputs = load_inputs(cfg);
    auto resolved = resolve_services(cfg, services, inputs.dataset);

    std::filesystem::create_directories(cfg.output_dir);
    ResponseCache cache(cfg.cache_dir.empty() ? cfg.output_dir / "cache" : cfg.cache_dir);
    const auto digest = config_digest(cfg);
    auto checkpoint = open_checkpoint(cfg.output_dir / checkpoint_file, digest);

    std::vector<Job> pending;
    std::vector<ExampleRecord> records;
    for (const auto& pass : seed_passes(cfg)) {
        for (const auto& ex : inputs.dataset) {
            auto it = checkpoint.done.find(job_key(ex.id, pass));
            if (it != checkpoint.done.end()) {
                records.push_back(it->second);
            } else {
                pending.push_back({&ex, pass});
            }
        }
    }
    if (!records.empty()) spdlog::info("resuming: {} examples restored from the checkpoint", records.size());

    // Examples run concurrently in waves bounded by the endpoint parallelism.
    // A failure lets the wave finish, checkpoints what completed, then stops.
    const auto total = records.size() + pending.size();
    for (std::size_t start = 0; start < pending.size(); start += cfg.parallelism) {
        const auto end = std::min(pending.size(), start + cfg.parallelism);
        std::vector<std::future<ExampleRecord>> wave;
        for (auto i = start; i < end; ++i) {
            wave.push_back(std::async(std::launch::async, [&, job = pending[i]] {
                return run_job(cfg, inputs.pool, job, resolved.view, cache);
            }));
        }
        std::exception_ptr failure;
        for (auto& f : wave) {
            try {
                auto rec = f.get();
                checkpoint.out << record_to_json(rec).dump() << '\n';
                records.push_back(std::move(rec));
            } catch (...) {
                if (!failure) failure = std::current_exception();
            }
        }
        checkpoint.out.flush();
        if (failure) {
            spdlog::error("stopping with {} of {} examples done; rerun to resume", records.size(), total);
            std::rethrow_exception(failure);
        }
    }

    auto report = build_report(cfg, digest, std::move(records));
    const auto tmp = cfg.output_dir / (std::string(report_file) + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw data_error("cannot write " + tmp.string());
        write_report(out, report);
    }
    std::filesystem::rename(tmp, cfg.output_dir / report_file);
    return report;
}

std::vector<RunConfig> expand_grid(const RunConfig& base, const AblationGrid& grid) {
    static const std::set<std::string> supported = {"k", "pool_size", "metric", "mode", "selection"};
    for (const auto& [axis, values] : grid) {
        if (!supported.count(axis)) {
            throw config_error("unsupported ablation axis '" + axis + "' (use k, pool_size, metric, mode, selection)");
        }
        if (values.empty()) throw config_error("ablation axis '" + axis + "' has no values");
    }

    std::vector<std::vector<std::pair<std::string, std::string>>> cells{{}};
    for (const auto& [axis, values] : grid) {
        std::vector<std::vector<std::pair<std::string, std::string>>> next;
        for (const auto& cell : cells) {
            for (const auto& v : values) {
                auto c = cell;
                c.emplace_back(axis, v);
                next.push_back(std::move(c));
            }
        }
        cells = std::move(next);
    }

    const auto shared_cache = base.cache_dir.empty() ? base.output_dir / "cache" : base.cache_dir;
    std::vector<RunConfig> out;
    for (const auto& cell : cells) {
        RunConfig cfg = base;
        for (const auto& [axis, value] : cell) {
            try {
                apply_config_value(cfg, axis, value);
            } catch (const config_error& e) {
                throw config_error(fmt::format("ablation cell {}: {}", grid_label(cell, ","), e.what()));
            }
        }
        if (!cell.empty()) {
            cfg.name = base.name + "[" + grid_label(cell, ",") + "]";
            cfg.output_dir = base.output_dir / grid_label(cell, "_");
        }
        cfg.cache_dir = shared_cache;
        try {
            validate(cfg);
        } catch (const config_error& e) {
            throw config_error(fmt::format("ablation cell {}: {}", grid_label(cell, ","), e.what()));
        }
        out.push_back(std::move(cfg));
    }
    return out;
}

std::vector<RunReport> ablate(const RunConfig& base, const AblationGrid& grid, const Services& services) {
    const auto configs = expand_grid(base, grid);
    std::vector<RunReport> reports;
    for (const auto& cfg : configs) {
        spdlog::info("ablation: running {}", cfg.name);
        reports.push_back(run_experiment(cfg, services));
    }
    return reports;
}

void write_report(std::ostream& out, const RunReport& report) {
    json head;
    head["type"] = "run";
    head["name"] = report.name;
    head["dataset_kind"] = std::string(to_string(report.dataset_kind));
    head["config_digest"] = report.config_digest;
    head["config"] = report.config;
    out << head.dump() << '\n';
    for (const auto& r : report.examples) out << record_to_json(r).dump() << '\n';
    for (const auto& s : report.per_seed) {
        json j;
        j["type"] = "seed_aggregate";
        if (s.seed) j["seed"] = *s.seed;
        j.update(row_to_json(s.row));
        out << j.dump() << '\n';
    }
    json agg;
    agg["type"] = "aggregate";
    agg.update(row_to_json(report.aggregate));
    agg["parse_failures"] = report.parse_failures;
    agg["empty_completions"] = report.empty_completions;
    out << agg.dump() << '\n';
}

RunReport read_report(std::istream& in, std::string_view source_name) {
    RunReport report;
    bool have_head = false, have_agg = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            auto j = json::parse(line);
            const auto type = j.at("type").get<std::string>();
            if (type == "run") {
                report.name = j.at("name").get<std::string>();
                auto kind = parse_dataset_kind(j.at("dataset_kind").get<std::string>());
                if (!kind) throw data_error("unknown dataset_kind");
                report.dataset_kind = *kind;
                report.config_digest = j.at("config_digest").get<std::string>();
                report.config = j.at("config").get<std::map<std::string, std::string>>();
                have_head = true;
            } else if (type == "example") {
                report.examples.push_back(record_from_json(j));
            } else if (type == "seed_aggregate") {
                SeedAggregate s;
                if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
                s.row = row_from_json(j);
                report.per_seed.push_back(s);
            } else if (type == "aggregate") {
                report.aggregate = row_from_json(j);
                report.parse_failures = j.at("parse_failures").get<std::size_t>();
                report.empty_completions = j.at("empty_completions").get<std::size_t>();
                have_agg = true;
            } else {
                throw data_error("unknown record type '" + type + "'");
            }
        } catch (const nlohmann::json::exception& e) {
            throw data_error(fmt::format("{}:{}: malformed report line: {}", source_name, line_no, e.what()));
        } catch (const data_error& e) {
            throw data_error(fmt::format("{}:{}: {}", source_name, line_no, e.what()));
        }
    }
    if (!have_head || !have_agg) throw data_error(std::string(source_name) + ": incomplete report");
    return report;
}

RunReport load_report(const std::filesystem::path& path) {
    auto p = std::filesystem::is_directory(path) ? path / report_file : path;
    std::ifstream in(p, std::ios::binary);
    if (!in) throw data_error("cannot open report " + p.string());
    return read_report(in, p.string());
}

std::string render_reports(const std::vector<RunReport>& reports, ReportFormat format) {
    if (reports.empty()) throw config_error("no reports to render");
    const auto kind = reports.front().dataset_kind;
    for (const auto& r : reports) {
        if (r.dataset_kind != kind) throw config_error("cannot mix asqa and aquamuse reports in one table");
    }

    if (format == ReportFormat::machine) {
        std::string out;
        for (const auto& r : reports) {
            json j;
            j["name"] = r.name;
            j["dataset_kind"] = std::string(to_string(r.dataset_kind));
            j.update(row_to_json(r.aggregate));
            j["parse_failures"] = r.parse_failures;
            j["empty_completions"] = r.empty_completions;
            out += j.dump() + "\n";
        }
        return out;
    }

    std::vector<std::string> header = {"Config"};
    std::vector<std::vector<std::string>> rows;
    if (kind == DatasetKind::asqa) {
        header.insert(header.end(), {"#Words", "ROUGE-L", "Disambig-F1", "DR"});
        for (const auto& r : reports) {
            const auto& a = r.aggregate;
            rows.push_back({r.name, fmt::format("{:.1f}", a.words), fmt_cell(a.rougeL), fmt_cell(a.disambig_f1),
                            fmt_cell(a.dr)});
        }
    } else {
        header.insert(header.end(), {"ROUGE-1", "ROUGE-2", "ROUGE-L", "QAEval"});
        for (const auto& r : reports) {
            const auto& a = r.aggregate;
            rows.push_back({r.name, fmt_cell(a.rouge1), fmt_cell(a.rouge2), fmt_cell(a.rougeL), fmt_cell(a.qaeval)});
        }
    }

    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        width[c] = header[c].size();
        for (const auto& row : rows) width[c] = std::max(width[c], row[c].size());
    }
    auto emit = [&](const std::vector<std::string>& cells) {
        std::string line = fmt::format("{:<{}}", cells[0], width[0]);
        for (std::size_t c = 1; c < cells.size(); ++c) line += fmt::format("  {:>{}}", cells[c], width[c]);
        return std::string(trim_right(line)) + "\n";
    };
    std::string out = emit(header);
    for (const auto& row : rows) out += emit(row);
    return out;
}

std::vector<std::string> score_predictions(std::istream& predictions, std::string_view source_name,
                                           const std::vector<DatasetExample>& dataset, ReadingComprehension* rc,
                                           const EvalToggles& toggles, const QaScoringOptions& opts) {
    std::map<std::string, const DatasetExample*> by_id;
    for (const auto& ex : dataset) by_id[ex.id] = &ex;

    std::vector<std::string> out;
    std::vector<ExampleRecord> records;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(predictions, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto where = fmt::format("{}:{}", source_name, line_no);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw data_error(where + ": malformed prediction: " + e.what());
        }
        if (!j.is_object() || !j.contains("id") || !j["id"].is_string() || !j.contains("answer") ||
            !j["answer"].is_string()) {
            throw data_error(where + ": predictions need string id and answer");
        }
        const auto id = j["id"].get<std::string>();
        auto it = by_id.find(id);
        if (it == by_id.end()) throw data_error(where + ": unknown example id '" + id + "'");
        if (!seen.insert(id).second) throw data_error(where + ": duplicate prediction for '" + id + "'");

        ExampleRecord rec;
        rec.example_id = id;
        rec.answer = j["answer"].get<std::string>();
        rec.scores = evaluate_answer(rec.answer, *it->second, rc, toggles, opts);
        json row;
        row["id"] = id;
        row.update(scores_to_json(rec.scores));
        out.push_back(row.dump());
        records.push_back(std::move(rec));
    }
    std::vector<const ExampleRecord*> ptrs;
    for (const auto& r : records) ptrs.push_back(&r);
    json summary;
    summary["summary"] = true;
    summary.update(row_to_json(aggregate_records(ptrs)));
    out.push_back(summary.dump());
    return out;
}

} // namespace lfqa
