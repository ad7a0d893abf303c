#include "lfqa/digest.hpp"
#include "lfqa/error.hpp"
#include "lfqa/runner.hpp"
#include "text_util.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace lfqa {

namespace {

constexpr std::string_view replay_prefix = "replay:";

std::string key_error(std::string_view key, std::string_view value, std::string_view expected) {
    return fmt::format("{} = {}: expected {}", key, value, expected);
}

std::uint64_t parse_uint(std::string_view key, std::string_view value) {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size()) {
        throw config_error(key_error(key, value, "a non-negative integer"));
    }
    return out;
}

double parse_real(std::string_view key, std::string_view value) {
    try {
        std::size_t used = 0;
        const std::string s(value);
        double d = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing");
        return d;
    } catch (const std::exception&) {
        throw config_error(key_error(key, value, "a number"));
    }
}

bool parse_bool(std::string_view key, std::string_view value) {
    const auto v = to_lower_ascii(value);
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw config_error(key_error(key, value, "true or false"));
}

std::vector<std::string> parse_list(std::string_view value) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= value.size()) {
        auto comma = value.find(',', start);
        auto end = comma == std::string_view::npos ? value.size() : comma;
        auto item = trim(value.substr(start, end - start));
        if (!item.empty()) out.emplace_back(item);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, std::string_view value) {
    std::filesystem::path p{std::string(value)};
    if (p.is_relative() && !base.empty()) p = base / p;
    return p.lexically_normal();
}

std::string join_paths(const std::vector<std::filesystem::path>& paths) {
    std::vector<std::string> parts;
    for (const auto& p : paths) parts.push_back(p.generic_string());
    return join(parts, ",");
}

} // namespace

std::string_view to_string(SelectionKind s) {
    switch (s) {
    case SelectionKind::random: return "random";
    case SelectionKind::diverse: return "diverse";
    case SelectionKind::dynamic: return "dynamic";
    }
    return "?";
}

std::optional<SelectionKind> parse_selection_kind(std::string_view name) {
    if (name == "random") return SelectionKind::random;
    if (name == "diverse") return SelectionKind::diverse;
    if (name == "dynamic") return SelectionKind::dynamic;
    return std::nullopt;
}

void apply_config_value(RunConfig& cfg, std::string_view key, std::string_view value,
                        const std::filesystem::path& base_dir) {
    if (key == "name") {
        if (value.empty()) throw config_error("name must be non-empty");
        cfg.name = std::string(value);
    } else if (key == "dataset") {
        cfg.dataset = resolve(base_dir, value);
    } else if (key == "dataset_kind") {
        auto k = parse_dataset_kind(value);
        if (!k) throw config_error(key_error(key, value, "asqa or aquamuse"));
        cfg.dataset_kind = *k;
    } else if (key == "pools") {
        cfg.pools.clear();
        for (const auto& p : parse_list(value)) cfg.pools.push_back(resolve(base_dir, p));
    } else if (key == "strict_pools") {
        cfg.strict_pools = parse_bool(key, value);
    } else if (key == "pool_size") {
        cfg.pool_size = parse_uint(key, value);
    } else if (key == "pool_seed") {
        cfg.pool_seed = parse_uint(key, value);
    } else if (key == "mode") {
        auto m = parse_refinement_mode(value);
        if (!m) throw config_error(key_error(key, value, "none, nl, qa, af or af_oracle_disambig"));
        cfg.mode = *m;
    } else if (key == "selection") {
        auto s = parse_selection_kind(value);
        if (!s) throw config_error(key_error(key, value, "random, diverse or dynamic"));
        cfg.selection = *s;
    } else if (key == "k") {
        cfg.k = parse_uint(key, value);
    } else if (key == "metric") {
        if (value == "none" || value.empty()) {
            cfg.metric.reset();
        } else {
            auto m = parse_metric_kind(value);
            if (!m) throw config_error(key_error(key, value, "bm25 or embedding_greedy_f1"));
            cfg.metric = *m;
        }
    } else if (key == "seeds") {
        cfg.seeds.clear();
        for (const auto& s : parse_list(value)) cfg.seeds.push_back(parse_uint(key, s));
    } else if (key == "token_budget") {
        cfg.token_budget = parse_uint(key, value);
    } else if (key == "model") {
        if (value.substr(0, replay_prefix.size()) == replay_prefix) {
            cfg.model = std::string(replay_prefix) +
                        resolve(base_dir, value.substr(replay_prefix.size())).generic_string();
        } else {
            cfg.model = std::string(value);
        }
    } else if (key == "model_id") {
        cfg.model_id = std::string(value);
    } else if (key == "max_new_tokens") {
        cfg.max_new_tokens = static_cast<int>(parse_uint(key, value));
    } else if (key == "temperature") {
        cfg.temperature = parse_real(key, value);
    } else if (key == "similarity") {
        cfg.similarity = std::string(value);
    } else if (key == "rc") {
        cfg.rc = std::string(value);
    } else if (key == "eval") {
        EvalToggles t{false, false, false};
        for (const auto& item : parse_list(value)) {
            if (item == "rouge") t.rouge = true;
            else if (item == "disambig") t.disambig = true;
            else if (item == "qaeval") t.qaeval = true;
            else throw config_error(key_error(key, item, "rouge, disambig or qaeval"));
        }
        cfg.eval = t;
    } else if (key == "gold_aggregation") {
        if (value == "max") cfg.gold_aggregation = GoldAggregation::max;
        else if (value == "mean") cfg.gold_aggregation = GoldAggregation::mean;
        else throw config_error(key_error(key, value, "max or mean"));
    } else if (key == "output_dir") {
        cfg.output_dir = resolve(base_dir, value);
    } else if (key == "cache_dir") {
        cfg.cache_dir = resolve(base_dir, value);
    } else if (key == "parallelism") {
        cfg.parallelism = parse_uint(key, value);
    } else {
        throw config_error(fmt::format("unknown config key '{}'", key));
    }
}

RunConfig parse_run_config(std::istream& in, std::string_view source_name, const std::filesystem::path& base_dir) {
    RunConfig cfg;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;
        auto eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw config_error(fmt::format("{}:{}: expected key = value", source_name, line_no));
        }
        auto key = std::string(trim(view.substr(0, eq)));
        auto value = trim(view.substr(eq + 1));
        if (!seen.insert(key).second) {
            throw config_error(fmt::format("{}:{}: duplicate key '{}'", source_name, line_no, key));
        }
        try {
            apply_config_value(cfg, key, value, base_dir);
        } catch (const config_error& e) {
            throw config_error(fmt::format("{}:{}: {}", source_name, line_no, e.what()));
        }
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config " + path.string());
    return parse_run_config(in, path.string(), path.parent_path());
}

void validate(const RunConfig& cfg) {
    if (cfg.dataset.empty()) throw config_error("dataset is required");
    if (cfg.pools.empty()) throw config_error("at least one pool is required");
    if (cfg.k < 1) throw config_error("k must be at least 1");
    if (cfg.model.empty()) throw config_error("model is required");
    if (cfg.model.substr(0, replay_prefix.size()) != replay_prefix && cfg.model.rfind("http://", 0) != 0 &&
        cfg.model.rfind("https://", 0) != 0) {
        throw config_error("model must be replay:<path> or an http(s) URL, got '" + cfg.model + "'");
    }
    if (cfg.model_id.empty()) throw config_error("model_id must be non-empty");
    if (cfg.max_new_tokens < 1) throw config_error("max_new_tokens must be at least 1");
    if (!(cfg.temperature >= 0.0)) throw config_error("temperature must be non-negative");
    if (cfg.token_budget < 1) throw config_error("token_budget must be at least 1");
    if (cfg.parallelism < 1) throw config_error("parallelism must be at least 1");
    if (cfg.output_dir.empty()) throw config_error("output_dir is required");
    if (cfg.selection == SelectionKind::dynamic && !cfg.metric) {
        throw config_error("dynamic selection needs a similarity metric");
    }
    if (cfg.selection == SelectionKind::random && cfg.seeds.empty()) {
        throw config_error("random selection needs at least one seed");
    }
    if (cfg.mode == RefinementMode::af_oracle_disambig && cfg.dataset_kind != DatasetKind::asqa) {
        throw config_error("af_oracle_disambig needs an asqa dataset");
    }
    if (cfg.pool_size != 0 && cfg.pool_size < cfg.k) {
        throw config_error(fmt::format("pool_size {} is smaller than k {}", cfg.pool_size, cfg.k));
    }
    if (cfg.rc != "stub" && cfg.rc.rfind("http://", 0) != 0 && cfg.rc.rfind("https://", 0) != 0) {
        throw config_error("rc must be 'stub' or an http(s) URL, got '" + cfg.rc + "'");
    }
}

std::map<std::string, std::string> config_echo(const RunConfig& cfg) {
    std::map<std::string, std::string> echo;
    echo["name"] = cfg.name;
    echo["dataset"] = cfg.dataset.generic_string();
    echo["dataset_kind"] = std::string(to_string(cfg.dataset_kind));
    echo["pools"] = join_paths(cfg.pools);
    echo["strict_pools"] = cfg.strict_pools ? "true" : "false";
    echo["pool_size"] = std::to_string(cfg.pool_size);
    echo["pool_seed"] = std::to_string(cfg.pool_seed);
    echo["mode"] = std::string(to_string(cfg.mode));
    echo["selection"] = std::string(to_string(cfg.selection));
    echo["k"] = std::to_string(cfg.k);
    echo["metric"] = cfg.metric ? std::string(to_string(*cfg.metric)) : "none";
    std::vector<std::string> seeds;
    for (auto s : cfg.seeds) seeds.push_back(std::to_string(s));
    echo["seeds"] = join(seeds, ",");
    echo["token_budget"] = std::to_string(cfg.token_budget);
    echo["model"] = cfg.model;
    echo["model_id"] = cfg.model_id;
    echo["max_new_tokens"] = std::to_string(cfg.max_new_tokens);
    echo["temperature"] = fmt::format("{}", cfg.temperature);
    echo["similarity"] = cfg.similarity;
    echo["rc"] = cfg.rc;
    std::vector<std::string> evals;
    if (cfg.eval.rouge) evals.emplace_back("rouge");
    if (cfg.eval.disambig) evals.emplace_back("disambig");
    if (cfg.eval.qaeval) evals.emplace_back("qaeval");
    echo["eval"] = join(evals, ",");
    echo["gold_aggregation"] = cfg.gold_aggregation == GoldAggregation::max ? "max" : "mean";
    return echo;
}

std::string config_digest(const RunConfig& cfg) {
    // The label does not influence any result.
    auto echo = config_echo(cfg);
    echo.erase("name");
    return sha256_hex(nlohmann::json(echo).dump());
}

} // namespace lfqa
