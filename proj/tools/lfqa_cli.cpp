#include "lfqa/data_io.hpp"
#include "lfqa/digest.hpp"
#include "lfqa/error.hpp"
#include "lfqa/runner.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>
#include <map>
#include <set>

using namespace lfqa;

namespace {

// Every run config key doubles as a command-line flag.
const std::vector<std::string> config_keys = {
    "name",        "dataset",  "dataset_kind", "pools",          "strict_pools", "pool_size",
    "pool_seed",   "mode",     "selection",    "k",              "metric",       "seeds",
    "token_budget", "model",   "model_id",     "max_new_tokens", "temperature",  "similarity",
    "rc",          "eval",     "gold_aggregation", "output_dir", "cache_dir",    "parallelism",
};

struct ConfigArgs {
    std::string config_path;
    std::map<std::string, std::string> overrides;
    std::vector<std::string> sets;
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
    cmd->add_option("-c,--config", args.config_path, "Run config file (key = value lines)");
    cmd->add_option("--set", args.sets, "Override a config key: key=value (repeatable)");
    for (const auto& key : config_keys) {
        const auto flag = key.size() == 1 ? "-" + key : "--" + key;
        cmd->add_option_function<std::string>(
            flag, [&args, key](const std::string& v) { args.overrides[key] = v; }, "Config key " + key);
    }
}

RunConfig build_config(const ConfigArgs& args) {
    RunConfig cfg;
    if (!args.config_path.empty()) cfg = load_run_config(args.config_path);
    // Command-line paths are relative to the working directory.
    for (const auto& [k, v] : args.overrides) apply_config_value(cfg, k, v);
    for (const auto& s : args.sets) {
        auto eq = s.find('=');
        if (eq == std::string::npos) throw config_error("--set expects key=value, got '" + s + "'");
        apply_config_value(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    return cfg;
}

AblationGrid parse_axes(const std::vector<std::string>& axes) {
    AblationGrid grid;
    for (const auto& a : axes) {
        auto eq = a.find('=');
        if (eq == std::string::npos) throw config_error("--axis expects name=v1,v2,..., got '" + a + "'");
        std::vector<std::string> values;
        std::string cur;
        for (char c : a.substr(eq + 1) + ",") {
            if (c == ',') {
                if (!cur.empty()) values.push_back(cur);
                cur.clear();
            } else if (c != ' ') {
                cur.push_back(c);
            }
        }
        grid.emplace_back(a.substr(0, eq), values);
    }
    return grid;
}

int cmd_pool_validate(const std::vector<std::string>& files, bool strict) {
    for (const auto& f : files) {
        auto pool = load_pool(f, strict);
        std::vector<std::string> parts;
        for (const auto& [t, n] : pool.counts_by_type()) parts.push_back(fmt::format("{}={}", to_string(t), n));
        fmt::print("{}: {} exemplars ({})\n", f, pool.size(), fmt::join(parts, ", "));
    }
    return 0;
}

int cmd_score(const std::string& dataset, const std::string& kind_name, const std::string& predictions,
              const std::string& rc_spec, const std::string& out_path) {
    auto kind = parse_dataset_kind(kind_name);
    if (!kind) throw config_error("--kind must be asqa or aquamuse");
    auto examples = load_dataset(dataset, *kind);
    std::unique_ptr<ReadingComprehension> rc;
    if (rc_spec == "stub") {
        rc = std::make_unique<SubstringStubRc>(SubstringStubRc::from_examples(examples));
    } else {
        rc = std::make_unique<HttpReadingComprehension>(rc_spec);
    }
    std::ifstream in(predictions);
    if (!in) throw data_error("cannot open predictions " + predictions);
    auto lines = score_predictions(in, predictions, examples, rc.get());

    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path, std::ios::binary | std::ios::trunc);
        if (!file) throw data_error("cannot write " + out_path);
    }
    std::ostream& out = out_path.empty() ? std::cout : file;
    for (const auto& l : lines) out << l << '\n';
    return 0;
}

int cmd_replay_bind(const ConfigArgs& args, const std::string& completions, const std::string& out_path) {
    auto cfg = build_config(args);
    std::map<std::string, std::string> by_id;
    std::ifstream in(completions);
    if (!in) throw data_error("cannot open completions " + completions);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("id") || !j["id"].is_string() ||
            !j.contains("completion") || !j["completion"].is_string()) {
            throw data_error(fmt::format("{}:{}: expected {{\"id\", \"completion\"}}", completions, line_no));
        }
        by_id[j["id"].get<std::string>()] = j["completion"].get<std::string>();
    }

    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw data_error("cannot write " + out_path);
    std::set<std::string> written;
    for (const auto& p : prepare_prompts(cfg)) {
        auto it = by_id.find(p.example_id);
        if (it == by_id.end()) throw data_error("no completion for example " + p.example_id);
        auto digest = sha256_hex(p.prompt);
        if (!written.insert(digest).second) continue;
        nlohmann::ordered_json rec;
        rec["prompt_sha256"] = digest;
        rec["completion"] = it->second;
        out << rec.dump() << '\n';
    }
    fmt::print("bound {} prompts to {}\n", written.size(), out_path);
    return 0;
}

int exit_code_for(const lfqa::error& e) {
    if (dynamic_cast<const endpoint_error*>(&e)) return 2;
    if (dynamic_cast<const data_error*>(&e)) return 3;
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Closed-book long-form QA with query-refinement prompting"};
    app.require_subcommand(1);
    std::string log_level = "warn";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

    auto* pool_cmd = app.add_subcommand("pool", "Exemplar pool tools");
    pool_cmd->require_subcommand(1);
    auto* pool_validate = pool_cmd->add_subcommand("validate", "Check pool files and print type counts");
    std::vector<std::string> pool_files;
    bool strict = false;
    pool_validate->add_option("files", pool_files, "Pool files")->required();
    pool_validate->add_flag("--strict", strict, "Require 20 exemplars per type and single-typed exemplars");

    ConfigArgs run_args;
    auto* run_cmd = app.add_subcommand("run", "Run one configuration");
    add_config_options(run_cmd, run_args);

    ConfigArgs ablate_args;
    std::vector<std::string> axes;
    auto* ablate_cmd = app.add_subcommand("ablate", "Run the Cartesian product of axis values");
    add_config_options(ablate_cmd, ablate_args);
    ablate_cmd->add_option("--axis", axes, "name=v1,v2,... over k, pool_size, metric, mode, selection")->required();

    std::string score_dataset, score_kind = "asqa", score_predictions_path, score_rc = "stub", score_out;
    auto* score_cmd = app.add_subcommand("score", "Score a prediction file of {id, answer} lines");
    score_cmd->add_option("--dataset", score_dataset, "Dataset file")->required();
    score_cmd->add_option("--kind", score_kind, "asqa or aquamuse");
    score_cmd->add_option("--predictions", score_predictions_path, "Prediction file")->required();
    score_cmd->add_option("--rc", score_rc, "'stub' or an RC endpoint URL");
    score_cmd->add_option("--out", score_out, "Output file (default stdout)");

    std::vector<std::string> report_paths;
    std::string report_format = "table";
    auto* report_cmd = app.add_subcommand("report", "Render run reports as a table or JSON lines");
    report_cmd->add_option("reports", report_paths, "report.jsonl files or run directories")->required();
    report_cmd->add_option("--format", report_format, "table or machine")
        ->check(CLI::IsMember({"table", "machine"}));

    auto* replay_cmd = app.add_subcommand("replay", "Replay table tools");
    replay_cmd->require_subcommand(1);
    ConfigArgs bind_args;
    std::string bind_completions, bind_out;
    auto* bind_cmd = replay_cmd->add_subcommand("bind", "Bind per-example completions to prompt digests");
    add_config_options(bind_cmd, bind_args);
    bind_cmd->add_option("--completions", bind_completions, "Lines of {id, completion}")->required();
    bind_cmd->add_option("--out", bind_out, "Replay table to write")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    spdlog::set_default_logger(spdlog::stderr_color_mt("lfqa"));
    spdlog::set_level(spdlog::level::from_str(log_level));

    try {
        if (pool_validate->parsed()) return cmd_pool_validate(pool_files, strict);
        if (run_cmd->parsed()) {
            auto report = run_experiment(build_config(run_args));
            fmt::print("{}", render_reports({report}, ReportFormat::table));
            if (report.parse_failures || report.empty_completions) {
                fmt::print("parse failures: {}, empty completions: {}\n", report.parse_failures,
                           report.empty_completions);
            }
            return 0;
        }
        if (ablate_cmd->parsed()) {
            auto reports = ablate(build_config(ablate_args), parse_axes(axes));
            fmt::print("{}", render_reports(reports, ReportFormat::table));
            return 0;
        }
        if (score_cmd->parsed()) {
            return cmd_score(score_dataset, score_kind, score_predictions_path, score_rc, score_out);
        }
        if (report_cmd->parsed()) {
            std::vector<RunReport> reports;
            for (const auto& p : report_paths) reports.push_back(load_report(p));
            fmt::print("{}", render_reports(reports, report_format == "machine" ? ReportFormat::machine
                                                                              : ReportFormat::table));
            return 0;
        }
        if (bind_cmd->parsed()) return cmd_replay_bind(bind_args, bind_completions, bind_out);
    } catch (const lfqa::error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return exit_code_for(e);
    } catch (const nlohmann::json::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 3;
    }
    return 1;
}
