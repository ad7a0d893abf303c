#include "lfqa/data_io.hpp"

#include "lfqa/error.hpp"
#include "text_util.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

namespace lfqa {

using json = nlohmann::ordered_json;

namespace {

// Raised inside record decoding; re-thrown with file/line context.
struct record_error {
    std::string message;
};

void check_keys(const json& rec, std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, _] : rec.items()) {
        bool known = false;
        for (auto a : allowed) {
            if (key == a) {
                known = true;
                break;
            }
        }
        if (!known) throw record_error{"unknown field \"" + key + "\""};
    }
}

std::string require_string(const json& rec, const char* key, bool allow_empty = false) {
    auto it = rec.find(key);
    if (it == rec.end()) throw record_error{std::string("missing field \"") + key + "\""};
    if (!it->is_string()) throw record_error{std::string("field \"") + key + "\" must be a string"};
    auto s = it->get<std::string>();
    if (!allow_empty && trim(s).empty()) {
        throw record_error{std::string("field \"") + key + "\" must be non-empty"};
    }
    return s;
}

std::optional<std::string> optional_string(const json& rec, const char* key) {
    auto it = rec.find(key);
    if (it == rec.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw record_error{std::string("field \"") + key + "\" must be a string"};
    return it->get<std::string>();
}

std::vector<std::string> require_answers(const json& rec, const char* key) {
    auto it = rec.find(key);
    if (it == rec.end() || !it->is_array() || it->empty()) {
        throw record_error{std::string("field \"") + key + "\" must be a non-empty array"};
    }
    std::vector<std::string> out;
    for (const auto& a : *it) {
        if (!a.is_string() || trim(a.get<std::string>()).empty()) {
            throw record_error{std::string("field \"") + key + "\" must hold non-empty strings"};
        }
        out.push_back(a.get<std::string>());
    }
    return out;
}

void require_schema_version(const json& rec, int expected) {
    auto it = rec.find("schema_version");
    if (it == rec.end()) throw record_error{"missing field \"schema_version\""};
    if (!it->is_number_integer() || it->get<int>() != expected) {
        throw record_error{"unsupported schema_version (expected " + std::to_string(expected) + ")"};
    }
}

std::vector<QaPair> optional_qa_list(const json& rec, const char* key) {
    std::vector<QaPair> out;
    auto it = rec.find(key);
    if (it == rec.end() || it->is_null()) return out;
    if (!it->is_array()) throw record_error{std::string("field \"") + key + "\" must be an array"};
    for (const auto& item : *it) {
        if (!item.is_object()) throw record_error{std::string("entries of \"") + key + "\" must be objects"};
        check_keys(item, {"question", "answers"});
        QaPair qa;
        qa.question = require_string(item, "question");
        qa.answers = require_answers(item, "answers");
        out.push_back(std::move(qa));
    }
    return out;
}

Exemplar decode_exemplar(const json& rec, const PoolParseOptions& opts) {
    if (!rec.is_object()) throw record_error{"record must be a JSON object"};
    check_keys(rec, {"id", "question", "qtype", "facets", "nl_explanation", "long_answer", "source_dataset",
                     "schema_version"});
    require_schema_version(rec, pool_schema_version);

    Exemplar ex;
    ex.id = require_string(rec, "id");
    ex.question = require_string(rec, "question");

    auto qt = rec.find("qtype");
    if (qt == rec.end()) throw record_error{"missing field \"qtype\""};
    std::vector<std::string> type_names;
    if (qt->is_string()) {
        type_names.push_back(qt->get<std::string>());
    } else if (qt->is_array() && !qt->empty()) {
        for (const auto& t : *qt) {
            if (!t.is_string()) throw record_error{"qtype entries must be strings"};
            type_names.push_back(t.get<std::string>());
        }
    } else {
        throw record_error{"field \"qtype\" must be a string or non-empty array"};
    }
    for (const auto& name : type_names) {
        if (!parse_question_type(name)) throw record_error{"unknown qtype \"" + name + "\""};
    }
    if (type_names.size() > 1) {
        if (opts.strict_balance) {
            throw record_error{"exemplar \"" + ex.id + "\" is labelled with multiple types"};
        }
        opts.on_warning("exemplar \"" + ex.id + "\" is labelled with multiple types; using " + type_names.front());
    }
    ex.qtype = *parse_question_type(type_names.front());

    auto facets = rec.find("facets");
    if (facets == rec.end() || !facets->is_array() || facets->empty()) {
        throw record_error{"field \"facets\" must be a non-empty array"};
    }
    for (const auto& f : *facets) {
        if (!f.is_object()) throw record_error{"facets must be objects"};
        check_keys(f, {"label", "question", "answers"});
        FacetPair fp;
        fp.label = require_string(f, "label");
        fp.question = optional_string(f, "question");
        fp.answers = require_answers(f, "answers");
        ex.facets.push_back(std::move(fp));
    }

    ex.nl_explanation = optional_string(rec, "nl_explanation");
    ex.long_answer = require_string(rec, "long_answer");

    auto src = parse_dataset_kind(require_string(rec, "source_dataset"));
    if (!src) throw record_error{"field \"source_dataset\" must be \"asqa\" or \"aquamuse\""};
    ex.source_dataset = *src;

    if (ex.qtype == QuestionType::needs_elaboration && ex.source_dataset != DatasetKind::aquamuse) {
        throw record_error{"NeedsElaboration exemplars must come from aquamuse"};
    }
    return ex;
}

template <typename Fn>
void for_each_record(std::istream& in, std::string_view source_name, Fn&& fn) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        try {
            json rec;
            try {
                rec = json::parse(line);
            } catch (const json::parse_error& e) {
                throw record_error{std::string("malformed record: ") + e.what()};
            }
            fn(rec, line_no);
        } catch (const record_error& e) {
            throw data_error(std::string(source_name) + ":" + std::to_string(line_no) + ": " + e.message);
        }
    }
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open " + path.string());
    return in;
}

json qa_list_to_json(const std::vector<QaPair>& list) {
    json arr = json::array();
    for (const auto& qa : list) {
        arr.push_back(json{{"question", qa.question}, {"answers", qa.answers}});
    }
    return arr;
}

} // namespace

ExemplarPool parse_pool(std::istream& in, std::string_view source_name, const PoolParseOptions& opts_in) {
    PoolParseOptions opts = opts_in;
    if (!opts.on_warning) {
        opts.on_warning = [](const std::string& msg) { spdlog::warn("{}", msg); };
    }

    std::vector<Exemplar> exemplars;
    std::set<std::string> ids;
    for_each_record(in, source_name, [&](const json& rec, std::size_t) {
        auto ex = decode_exemplar(rec, opts);
        if (!ids.insert(ex.id).second) throw record_error{"duplicate exemplar id \"" + ex.id + "\""};
        exemplars.push_back(std::move(ex));
    });
    if (exemplars.empty()) throw data_error(std::string(source_name) + ": empty pool");

    ExemplarPool pool(std::move(exemplars));
    if (opts.strict_balance) {
        std::string offending;
        for (const auto& [type, count] : pool.counts_by_type()) {
            if (count != balanced_type_count) {
                if (!offending.empty()) offending += ", ";
                offending += std::string(to_string(type)) + " (" + std::to_string(count) + ")";
            }
        }
        if (!offending.empty()) {
            throw data_error(std::string(source_name) + ": pool is not balanced at " +
                             std::to_string(balanced_type_count) + " per type: " + offending);
        }
    }
    return pool;
}

ExemplarPool load_pool(const std::filesystem::path& path, bool strict_balance) {
    auto in = open_input(path);
    PoolParseOptions opts;
    opts.strict_balance = strict_balance;
    return parse_pool(in, path.string(), opts);
}

std::string exemplar_to_line(const Exemplar& ex) {
    json rec;
    rec["id"] = ex.id;
    rec["question"] = ex.question;
    rec["qtype"] = std::string(to_string(ex.qtype));
    json facets = json::array();
    for (const auto& f : ex.facets) {
        json jf;
        jf["label"] = f.label;
        if (f.question) jf["question"] = *f.question;
        jf["answers"] = f.answers;
        facets.push_back(std::move(jf));
    }
    rec["facets"] = std::move(facets);
    if (ex.nl_explanation) rec["nl_explanation"] = *ex.nl_explanation;
    rec["long_answer"] = ex.long_answer;
    rec["source_dataset"] = std::string(to_string(ex.source_dataset));
    rec["schema_version"] = pool_schema_version;
    return rec.dump();
}

void write_pool(std::ostream& out, const ExemplarPool& pool) {
    for (const auto& ex : pool) out << exemplar_to_line(ex) << '\n';
}

std::vector<DatasetExample> parse_dataset(std::istream& in, std::string_view source_name, DatasetKind kind) {
    std::vector<DatasetExample> out;
    std::set<std::string> ids;
    for_each_record(in, source_name, [&](const json& rec, std::size_t) {
        if (!rec.is_object()) throw record_error{"record must be a JSON object"};
        check_keys(rec, {"id", "question", "gold_long_answers", "gold_qa_pairs", "eval_questions", "schema_version"});
        require_schema_version(rec, dataset_schema_version);
        DatasetExample ex;
        ex.id = require_string(rec, "id");
        ex.question = require_string(rec, "question");
        auto longs = rec.find("gold_long_answers");
        if (longs == rec.end() || !longs->is_array() || longs->empty()) {
            throw record_error{"example \"" + ex.id + "\" has no gold_long_answers"};
        }
        ex.gold_long_answers = require_answers(rec, "gold_long_answers");
        ex.gold_qa_pairs = optional_qa_list(rec, "gold_qa_pairs");
        ex.eval_questions = optional_qa_list(rec, "eval_questions");
        if (kind == DatasetKind::asqa && ex.gold_qa_pairs.empty()) {
            throw record_error{"ASQA example \"" + ex.id + "\" has no gold_qa_pairs"};
        }
        if (!ids.insert(ex.id).second) throw record_error{"duplicate example id \"" + ex.id + "\""};
        out.push_back(std::move(ex));
    });
    if (out.empty()) throw data_error(std::string(source_name) + ": empty dataset");
    return out;
}

std::vector<DatasetExample> load_dataset(const std::filesystem::path& path, DatasetKind kind) {
    auto in = open_input(path);
    return parse_dataset(in, path.string(), kind);
}

void write_dataset(std::ostream& out, const std::vector<DatasetExample>& examples) {
    for (const auto& ex : examples) {
        json rec;
        rec["id"] = ex.id;
        rec["question"] = ex.question;
        rec["gold_long_answers"] = ex.gold_long_answers;
        if (!ex.gold_qa_pairs.empty()) rec["gold_qa_pairs"] = qa_list_to_json(ex.gold_qa_pairs);
        if (!ex.eval_questions.empty()) rec["eval_questions"] = qa_list_to_json(ex.eval_questions);
        rec["schema_version"] = dataset_schema_version;
        out << rec.dump() << '\n';
    }
}

} // namespace lfqa
