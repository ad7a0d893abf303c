#pragma once

#include "lfqa/llm_client.hpp"
#include "lfqa/metrics.hpp"
#include "lfqa/rc_client.hpp"
#include "lfqa/similarity.hpp"
#include "lfqa/types.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lfqa {

enum class SelectionKind { random, diverse, dynamic };

std::string_view to_string(SelectionKind s);
std::optional<SelectionKind> parse_selection_kind(std::string_view name);

struct RunConfig {
    std::string name = "run"; // row label in report tables
    std::filesystem::path dataset;
    DatasetKind dataset_kind = DatasetKind::asqa;
    std::vector<std::filesystem::path> pools; // unioned
    bool strict_pools = false;
    std::size_t pool_size = 0; // 0: whole pool; else a seeded subsample
    std::uint64_t pool_seed = 0;

    RefinementMode mode = RefinementMode::af;
    SelectionKind selection = SelectionKind::dynamic;
    std::size_t k = 5;
    std::optional<MetricKind> metric = MetricKind::bm25;
    std::vector<std::uint64_t> seeds;
    std::size_t token_budget = 2048;

    std::string model;              // "replay:<path>" or an http(s) URL
    std::string model_id = "replay";
    int max_new_tokens = 512;
    double temperature = 0.0;
    std::string similarity;         // similarity endpoint URL (embedding metric)
    std::string rc = "stub";        // "stub" or an http(s) URL

    EvalToggles eval;
    GoldAggregation gold_aggregation = GoldAggregation::max;

    std::filesystem::path output_dir;
    std::filesystem::path cache_dir; // default: <output_dir>/cache
    std::size_t parallelism = 4;
};

/// Flat "key = value" file; '#' starts a comment, lists are comma separated.
/// Relative paths resolve against `base_dir`. Unknown keys are errors.
RunConfig parse_run_config(std::istream& in, std::string_view source_name,
                           const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Applies one "key = value" assignment, as the config file would.
void apply_config_value(RunConfig& cfg, std::string_view key, std::string_view value,
                        const std::filesystem::path& base_dir = {});

/// Throws config_error on inconsistent settings.
void validate(const RunConfig& cfg);

/// Canonical key/value echo. Settings that cannot change results (output and
/// cache locations, parallelism) are omitted.
std::map<std::string, std::string> config_echo(const RunConfig& cfg);
std::string config_digest(const RunConfig& cfg);

/// Injected backends; null members are built from the config strings.
struct Services {
    CompletionEndpoint* model = nullptr;
    ReadingComprehension* rc = nullptr;
    SimilarityClient* similarity = nullptr;
};

struct ExampleRecord {
    std::string example_id;
    std::optional<std::uint64_t> seed; // set for seeded selection
    std::string prompt_digest;         // sha256 of the rendered prompt
    std::string request_digest;
    std::vector<std::string> exemplar_ids;
    std::size_t excluded = 0;          // pool exemplars equal to the question
    std::string answer;                // the text that was scored
    bool parse_ok = false;
    bool empty_completion = false;
    EvalScores scores;

    // Not persisted.
    std::chrono::milliseconds latency{0};
    bool cache_hit = false;
};

struct AggregateRow {
    std::size_t examples = 0;
    double words = 0.0;
    std::optional<double> rouge1;
    std::optional<double> rouge2;
    std::optional<double> rougeL;
    std::optional<double> disambig_f1;
    std::optional<double> dr; // from the aggregate ROUGE-L and Disambig-F1
    std::optional<double> qaeval;
};

struct SeedAggregate {
    std::optional<std::uint64_t> seed;
    AggregateRow row;
};

struct RunReport {
    std::string name;
    DatasetKind dataset_kind = DatasetKind::asqa;
    std::map<std::string, std::string> config;
    std::string config_digest;
    std::vector<ExampleRecord> examples; // by example id, then seed
    std::vector<SeedAggregate> per_seed;
    AggregateRow aggregate;              // mean over seeds of per-seed means
    std::size_t parse_failures = 0;
    std::size_t empty_completions = 0;
};

/// Macro means over records; dr from the resulting ROUGE-L and Disambig-F1.
AggregateRow aggregate_records(const std::vector<const ExampleRecord*>& records);
/// Means over rows, dr recomputed from the means.
AggregateRow mean_rows(const std::vector<AggregateRow>& rows);

/// One prompt per (seed, example) in dispatch order.
struct PreparedPrompt {
    std::string example_id;
    std::optional<std::uint64_t> seed;
    std::string prompt;
    std::vector<std::string> exemplar_ids;
    std::size_t excluded = 0;
};
std::vector<PreparedPrompt> prepare_prompts(const RunConfig& cfg, const Services& services = {});

/// Runs (or resumes) one configuration and writes <output_dir>/report.jsonl.
/// An endpoint outage stops dispatching, keeps finished examples in
/// <output_dir>/checkpoint.jsonl and rethrows; rerunning resumes from there.
RunReport run_experiment(const RunConfig& cfg, const Services& services = {});

/// Axis name -> values; supported axes: k, pool_size, metric, mode, selection.
using AblationGrid = std::vector<std::pair<std::string, std::vector<std::string>>>;

/// The configurations of the Cartesian product, each validated, with its
/// own name and output subdirectory.
std::vector<RunConfig> expand_grid(const RunConfig& base, const AblationGrid& grid);
std::vector<RunReport> ablate(const RunConfig& base, const AblationGrid& grid, const Services& services = {});

void write_report(std::ostream& out, const RunReport& report);
RunReport read_report(std::istream& in, std::string_view source_name);
RunReport load_report(const std::filesystem::path& path);

enum class ReportFormat { table, machine };
std::string render_reports(const std::vector<RunReport>& reports, ReportFormat format);

/// Scores a prediction file: lines {"id","answer"} against the dataset.
/// Returns one JSON line per prediction plus a final summary line.
std::vector<std::string> score_predictions(std::istream& predictions, std::string_view source_name,
                                           const std::vector<DatasetExample>& dataset, ReadingComprehension* rc,
                                           const EvalToggles& toggles = {}, const QaScoringOptions& opts = {});

} // namespace lfqa
