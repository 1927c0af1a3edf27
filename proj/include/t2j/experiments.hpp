// Copyright (c) 2026, T2J harness contributors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end pipelines: baseline and augmented translation, intrinsic
// (leave-one-out) and extrinsic evaluation, the fixing-cost correlation
// table, and report emission.
//
// Run configuration is a JSON document:
//
//   {
//     "dataset":         "fixed_bugs.json",     fixed-bug dataset (context, intrinsic items)
//     "references":      "ground_truth.json",   intrinsic reference corpus
//     "t2j_fixes":       "t2j_fixed_bugs.json", optional; FixCost of augmented outputs
//     "external_corpus": "github.json",         extrinsic items
//     "templates":       "templates",
//     "roles": {"cheap":  {"model": "...", "temperature": 0, "max_tokens": 4096},
//               "costly": {"model": "..."}},
//     "codebleu": {"weights": [0.25, 0.25, 0.25, 0.25], "max_n": 4,
//                  "keyword_weight": 5, "extra_keywords": []},
//     "timeout_seconds": 180,
//     "seed": 7,
//     "output_dir": "out",
//     "max_in_flight": 4,
//     "max_attempts": 3,
//     "data_note": "optional description of the data.csv attachment"
//   }
//
// Relative paths resolve against the directory holding the config file.

#pragma once

#include <array>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "t2j/codebleu/codebleu.hpp"
#include "t2j/corpus.hpp"
#include "t2j/error.hpp"
#include "t2j/io.hpp"
#include "t2j/judge.hpp"
#include "t2j/llm_client.hpp"
#include "t2j/prompt.hpp"
#include "t2j/stats.hpp"

namespace t2j::experiments {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Configuration

struct RunConfig {
    std::optional<fs::path> dataset;
    std::optional<fs::path> references;
    std::optional<fs::path> t2j_fixes;
    std::optional<fs::path> external_corpus;
    fs::path template_dir = prompt::default_template_dir();
    std::vector<llm::ModelRole> roles;
    codebleu::CodeBleuConfig codebleu;
    double timeout_seconds = 180.0;
    std::uint64_t seed = 0;
    fs::path output_dir = "out";
    std::size_t max_in_flight = 4;
    int max_attempts = 3;
    std::optional<std::string> data_note;
    /// The document as written, echoed into every report.
    ojson echo;
};

namespace detail {

template <typename T>
T get_typed(const nlohmann::json& obj, const char* key, const std::string& where,
            bool (nlohmann::json::*is)() const noexcept, const char* type) {
    const auto& v = obj.at(key);
    if (!(v.*is)()) throw ConfigError(where + "." + key + " must be " + type);
    return v.get<T>();
}

inline void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& allowed,
                           const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw ConfigError(where + ": unknown key \"" + it.key() + "\"");
        }
    }
}

}  // namespace detail

inline RunConfig parse_run_config(std::string_view text, const fs::path& base_dir = ".") {
    ojson doc;
    try {
        doc = ojson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("run config: ") + e.what(), e.byte);
    }
    if (!doc.is_object()) throw ConfigError("run config must be a JSON object");
    const nlohmann::json j = nlohmann::json::parse(doc.dump());
    detail::reject_unknown(j,
                           {"dataset", "references", "t2j_fixes", "external_corpus", "templates",
                            "roles", "codebleu", "timeout_seconds", "seed", "output_dir",
                            "max_in_flight", "max_attempts", "data_note"},
                           "config");
    RunConfig c;
    c.echo = doc;
    auto path_of = [&](const char* key) -> std::optional<fs::path> {
        if (!j.contains(key) || j[key].is_null()) return std::nullopt;
        if (!j[key].is_string()) throw ConfigError(std::string("config.") + key + " must be a path");
        fs::path p = j[key].get<std::string>();
        return p.is_absolute() ? p : base_dir / p;
    };
    c.dataset = path_of("dataset");
    c.references = path_of("references");
    c.t2j_fixes = path_of("t2j_fixes");
    c.external_corpus = path_of("external_corpus");
    if (auto t = path_of("templates")) c.template_dir = *t;
    if (auto o = path_of("output_dir")) c.output_dir = *o;

    if (!j.contains("roles") || !j["roles"].is_object()) {
        throw ConfigError("config.roles must map role names to models");
    }
    for (auto it = j["roles"].begin(); it != j["roles"].end(); ++it) {
        const std::string where = "config.roles." + it.key();
        llm::ModelRole r;
        r.role = llm::role_from_string(it.key());
        const auto& v = it.value();
        if (v.is_string()) {
            r.model_id = v.get<std::string>();
        } else if (v.is_object()) {
            detail::reject_unknown(v, {"model", "temperature", "max_tokens"}, where);
            if (!v.contains("model")) throw ConfigError(where + ".model is required");
            r.model_id = detail::get_typed<std::string>(v, "model", where,
                                                        &nlohmann::json::is_string, "a string");
            if (v.contains("temperature")) {
                r.params.temperature = detail::get_typed<double>(
                    v, "temperature", where, &nlohmann::json::is_number, "a number");
            }
            if (v.contains("max_tokens")) {
                r.params.max_tokens = detail::get_typed<int>(
                    v, "max_tokens", where, &nlohmann::json::is_number_integer, "an integer");
            }
        } else {
            throw ConfigError(where + " must be a model id or an object");
        }
        if (r.model_id.empty()) throw ConfigError(where + ".model is empty");
        c.roles.push_back(r);
    }

    if (j.contains("codebleu")) {
        const auto& cb = j["codebleu"];
        if (!cb.is_object()) throw ConfigError("config.codebleu must be an object");
        detail::reject_unknown(cb, {"weights", "max_n", "keyword_weight", "extra_keywords"},
                               "config.codebleu");
        if (cb.contains("weights")) {
            const auto& w = cb["weights"];
            if (!w.is_array() || w.size() != 4) {
                throw ConfigError("config.codebleu.weights must list four numbers");
            }
            for (std::size_t i = 0; i < 4; ++i) {
                if (!w[i].is_number()) throw ConfigError("config.codebleu.weights must be numbers");
                c.codebleu.weights[i] = w[i].get<double>();
            }
            try {
                codebleu::validate_weights(c.codebleu.weights);
            } catch (const ArgumentError& e) {
                throw ConfigError(std::string("config.codebleu.weights: ") + e.what());
            }
        }
        if (cb.contains("max_n")) {
            if (!cb["max_n"].is_number_unsigned() || cb["max_n"].get<std::size_t>() < 1) {
                throw ConfigError("config.codebleu.max_n must be a positive integer");
            }
            c.codebleu.max_n = cb["max_n"].get<std::size_t>();
        }
        if (cb.contains("keyword_weight")) {
            if (!cb["keyword_weight"].is_number() || cb["keyword_weight"].get<double>() < 1.0) {
                throw ConfigError("config.codebleu.keyword_weight must be a number >= 1");
            }
            c.codebleu.keyword_weight = cb["keyword_weight"].get<double>();
        }
        if (cb.contains("extra_keywords")) {
            if (!cb["extra_keywords"].is_array()) {
                throw ConfigError("config.codebleu.extra_keywords must be an array");
            }
            for (const auto& k : cb["extra_keywords"]) {
                if (!k.is_string()) throw ConfigError("config.codebleu.extra_keywords: strings only");
                c.codebleu.extra_keywords.insert(k.get<std::string>());
            }
        }
    }
    if (j.contains("timeout_seconds")) {
        if (!j["timeout_seconds"].is_number() || !(j["timeout_seconds"].get<double>() > 0)) {
            throw ConfigError("config.timeout_seconds must be a positive number");
        }
        c.timeout_seconds = j["timeout_seconds"].get<double>();
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) {
            throw ConfigError("config.seed must be a non-negative integer");
        }
        c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("max_in_flight")) {
        if (!j["max_in_flight"].is_number_unsigned() || j["max_in_flight"].get<std::size_t>() < 1) {
            throw ConfigError("config.max_in_flight must be a positive integer");
        }
        c.max_in_flight = j["max_in_flight"].get<std::size_t>();
    }
    if (j.contains("max_attempts")) {
        if (!j["max_attempts"].is_number_unsigned() || j["max_attempts"].get<int>() < 1) {
            throw ConfigError("config.max_attempts must be a positive integer");
        }
        c.max_attempts = j["max_attempts"].get<int>();
    }
    if (j.contains("data_note") && !j["data_note"].is_null()) {
        if (!j["data_note"].is_string()) throw ConfigError("config.data_note must be a string");
        c.data_note = j["data_note"].get<std::string>();
    }
    return c;
}

inline RunConfig load_run_config(const fs::path& path) {
    if (!fs::exists(path)) throw ConfigError("run config " + path.string() + " does not exist");
    return parse_run_config(io::read_file(path), path.parent_path().empty() ? "." : path.parent_path());
}

// ---------------------------------------------------------------------------
// Report model

inline constexpr std::array<const char*, 7> kMetrics = {
    "CodeBLEU",
    "T2J_CodeTrans_Use_Ref",
    "T2J_CodeTrans_Func_Ref",
    "T2J_CodeTrans_Use_NoRef",
    "T2J_CodeTrans_Func_NoRef",
    "T2J_FixCost_Score",
    "T2J_Comparison_Score",
};
inline constexpr std::size_t kCodeBleu = 0;
inline constexpr std::size_t kFixCost = 5;
inline constexpr std::size_t kComparison = 6;

inline std::size_t metric_index(prompt::PromptKind k) {
    switch (k) {
        case prompt::PromptKind::CodeTransUseRef: return 1;
        case prompt::PromptKind::CodeTransFuncRef: return 2;
        case prompt::PromptKind::CodeTransUseNoRef: return 3;
        case prompt::PromptKind::CodeTransFuncNoRef: return 4;
        case prompt::PromptKind::Comparison: return kComparison;
        default: throw ArgumentError("no report metric for " + std::string(prompt::to_string(k)));
    }
}

struct Candidate {
    std::optional<std::string> code;
    std::string error;
    double latency_seconds = 0.0;

    bool operator==(const Candidate&) const = default;
};

struct MetricPair {
    std::optional<double> baseline;
    std::optional<double> t2j;

    bool operator==(const MetricPair&) const = default;
};

struct ExampleRow {
    std::string id;
    std::optional<std::string> reference;
    Candidate baseline;
    Candidate t2j;
    std::array<MetricPair, 7> metrics{};
    std::optional<std::string> excluded;  // reason, when left out of every mean

    bool operator==(const ExampleRow&) const = default;
};

struct SummaryRow {
    std::string metric;
    std::optional<double> baseline;
    std::optional<double> t2j;
    std::size_t n_baseline = 0;
    std::size_t n_t2j = 0;
    bool not_applicable = false;

    bool operator==(const SummaryRow&) const = default;
};

struct ExperimentReport {
    std::string setting;  // "intrinsic" or "extrinsic"
    std::uint64_t seed = 0;
    std::string provider;
    ojson config;
    std::vector<ExampleRow> rows;
    std::vector<SummaryRow> summary;
    std::vector<std::string> notes;

    bool operator==(const ExperimentReport&) const = default;
};

/// Means over present per-row values; FixCost is the total of per-row
/// counts (the value a fix-step table publishes). Excluded rows never count.
inline std::vector<SummaryRow> summarize(const std::vector<ExampleRow>& rows,
                                         bool fixcost_applicable) {
    std::vector<SummaryRow> out;
    for (std::size_t m = 0; m < kMetrics.size(); ++m) {
        SummaryRow s;
        s.metric = kMetrics[m];
        if (m == kFixCost && !fixcost_applicable) {
            s.not_applicable = true;
            out.push_back(s);
            continue;
        }
        double sb = 0.0, st = 0.0;
        for (const auto& r : rows) {
            if (r.excluded) continue;
            if (r.metrics[m].baseline) {
                sb += *r.metrics[m].baseline;
                ++s.n_baseline;
            }
            if (r.metrics[m].t2j) {
                st += *r.metrics[m].t2j;
                ++s.n_t2j;
            }
        }
        const bool total = m == kFixCost;
        if (s.n_baseline) s.baseline = total ? sb : sb / static_cast<double>(s.n_baseline);
        if (s.n_t2j) s.t2j = total ? st : st / static_cast<double>(s.n_t2j);
        out.push_back(s);
    }
    return out;
}

// -- JSON ------------------------------------------------------------------

namespace detail {

inline ojson opt(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }
inline ojson opt(const std::optional<std::string>& v) { return v ? ojson(*v) : ojson(nullptr); }

inline std::optional<double> opt_double(const ojson& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}
inline std::optional<std::string> opt_string(const ojson& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<std::string>();
}

inline ojson candidate_json(const Candidate& c) {
    ojson j;
    j["code"] = opt(c.code);
    j["error"] = c.error;
    j["latency_seconds"] = c.latency_seconds;
    return j;
}

inline Candidate candidate_from(const ojson& j) {
    return Candidate{opt_string(j.at("code")), j.at("error").get<std::string>(),
                     j.at("latency_seconds").get<double>()};
}

}  // namespace detail

inline ojson to_json(const ExperimentReport& r) {
    ojson j;
    j["setting"] = r.setting;
    j["seed"] = r.seed;
    j["provider"] = r.provider;
    j["config"] = r.config;
    auto& rows = j["rows"] = ojson::array();
    for (const auto& row : r.rows) {
        ojson x;
        x["id"] = row.id;
        x["reference"] = detail::opt(row.reference);
        x["baseline"] = detail::candidate_json(row.baseline);
        x["t2j"] = detail::candidate_json(row.t2j);
        auto& m = x["metrics"] = ojson::object();
        for (std::size_t k = 0; k < kMetrics.size(); ++k) {
            m[kMetrics[k]] = {{"baseline", detail::opt(row.metrics[k].baseline)},
                              {"t2j", detail::opt(row.metrics[k].t2j)}};
        }
        x["excluded"] = detail::opt(row.excluded);
        rows.push_back(std::move(x));
    }
    auto& summary = j["summary"] = ojson::array();
    for (const auto& s : r.summary) {
        summary.push_back({{"metric", s.metric},
                           {"baseline", detail::opt(s.baseline)},
                           {"t2j", detail::opt(s.t2j)},
                           {"n_baseline", s.n_baseline},
                           {"n_t2j", s.n_t2j},
                           {"not_applicable", s.not_applicable}});
    }
    j["notes"] = r.notes;
    return j;
}

inline ExperimentReport report_from_json(const ojson& j) {
    try {
        ExperimentReport r;
        r.setting = j.at("setting").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.provider = j.at("provider").get<std::string>();
        r.config = j.at("config");
        for (const auto& x : j.at("rows")) {
            ExampleRow row;
            row.id = x.at("id").get<std::string>();
            row.reference = detail::opt_string(x.at("reference"));
            row.baseline = detail::candidate_from(x.at("baseline"));
            row.t2j = detail::candidate_from(x.at("t2j"));
            for (std::size_t k = 0; k < kMetrics.size(); ++k) {
                const auto& m = x.at("metrics").at(kMetrics[k]);
                row.metrics[k] = {detail::opt_double(m.at("baseline")),
                                  detail::opt_double(m.at("t2j"))};
            }
            row.excluded = detail::opt_string(x.at("excluded"));
            r.rows.push_back(std::move(row));
        }
        for (const auto& s : j.at("summary")) {
            r.summary.push_back({s.at("metric").get<std::string>(),
                                 detail::opt_double(s.at("baseline")),
                                 detail::opt_double(s.at("t2j")),
                                 s.at("n_baseline").get<std::size_t>(),
                                 s.at("n_t2j").get<std::size_t>(),
                                 s.at("not_applicable").get<bool>()});
        }
        r.notes = j.at("notes").get<std::vector<std::string>>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed report: ") + e.what());
    }
}

inline ExperimentReport load_report(const fs::path& path) {
    const std::string text = io::read_file(path);
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what(), e.byte);
    }
    return report_from_json(j);
}

// -- CSV / Markdown ----------------------------------------------------------

namespace detail {

inline std::string full_precision(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace detail

/// One header line plus one line per example.
inline std::string to_csv(const ExperimentReport& r) {
    std::ostringstream os;
    os << "id,excluded,baseline_ok,t2j_ok";
    for (const auto* m : kMetrics) os << ',' << m << "_baseline," << m << "_t2j";
    os << '\n';
    auto cell = [](const std::optional<double>& v) {
        return v ? detail::full_precision(*v) : std::string();
    };
    for (const auto& row : r.rows) {
        os << detail::csv_field(row.id) << ',' << (row.excluded ? 1 : 0) << ','
           << (row.baseline.code ? 1 : 0) << ',' << (row.t2j.code ? 1 : 0);
        for (const auto& m : row.metrics) os << ',' << cell(m.baseline) << ',' << cell(m.t2j);
        os << '\n';
    }
    return os.str();
}

inline std::string to_markdown(const ExperimentReport& r) {
    auto fmt = [](const SummaryRow& s, const std::optional<double>& v) -> std::string {
        if (s.not_applicable) return "N/A";
        if (!v) return "-";
        char buf[32];
        if (s.metric == kMetrics[kFixCost]) {
            std::snprintf(buf, sizeof buf, "%.0f", *v);
        } else {
            std::snprintf(buf, sizeof buf, "%.2f", *v);
        }
        return buf;
    };
    std::ostringstream os;
    std::string title = r.setting;
    if (!title.empty()) title[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(title[0])));
    os << "## " << title << " evaluation\n\n";
    os << "| Metric | Baseline | T2J |\n|---|---:|---:|\n";
    for (const auto& s : r.summary) {
        os << "| " << s.metric << " | " << fmt(s, s.baseline) << " | " << fmt(s, s.t2j) << " |\n";
    }
    std::size_t excluded = 0;
    for (const auto& row : r.rows) excluded += row.excluded ? 1 : 0;
    os << "\n" << r.rows.size() << " examples, " << excluded << " excluded. Seed " << r.seed
       << ", provider " << r.provider << ".";
    if (!r.summary.empty() && r.summary[kFixCost].metric == kMetrics[kFixCost] &&
        !r.summary[kFixCost].not_applicable) {
        os << " FixCost is the total number of fix steps.";
    }
    os << "\n";
    for (const auto& n : r.notes) os << "\n- " << n;
    if (!r.notes.empty()) os << "\n";
    return os.str();
}

/// Writes report.json, per_example.csv and summary.md into `dir`.
inline void emit_report(const ExperimentReport& r, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    io::atomic_write_file(dir / "report.json", to_json(r).dump(2) + "\n");
    io::atomic_write_file(dir / "per_example.csv", to_csv(r));
    io::atomic_write_file(dir / "summary.md", to_markdown(r));
}

// ---------------------------------------------------------------------------
// Translation

namespace detail {

inline Candidate translate_one(llm::LlmClient& client, const prompt::RenderedPrompt& p) {
    Candidate c;
    try {
        auto x = client.complete(p, llm::Role::Cheap);
        c.latency_seconds = x.latency_seconds;
        std::string code = llm::extract_code(x.response);
        if (code.empty()) {
            c.error = "no code in response";
        } else {
            c.code = std::move(code);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        c.error = e.what();
    }
    return c;
}

inline void log_translation(llm::LlmClient& client, const std::string& system,
                            const std::vector<corpus::CorpusItem>& items,
                            const std::vector<Candidate>& out) {
    for (std::size_t i = 0; i < items.size(); ++i) {
        ojson j;
        j["type"] = "translation";
        j["system"] = system;
        j["id"] = items[i].id;
        j["ok"] = out[i].code.has_value();
        if (!out[i].code) j["error"] = out[i].error;
        client.log().append(j);
    }
}

}  // namespace detail

/// Standard-prompt translation on the cheap role, one result per item in
/// input order. Failed items carry an error instead of code.
inline std::vector<Candidate> run_baseline_translation(llm::LlmClient& client,
                                                       const prompt::TemplateSet& templates,
                                                       const std::vector<corpus::CorpusItem>& items) {
    if (items.empty()) throw ArgumentError("run_baseline_translation: empty corpus");
    std::vector<Candidate> out(items.size());
    client.log().ordered_for(items.size(), client.max_in_flight(), [&](std::size_t i) {
        out[i] = detail::translate_one(client, prompt::render_standard(templates, items[i].source));
    });
    detail::log_translation(client, "baseline", items, out);
    return out;
}

/// Context document for one item: leave-one-out when the item is itself a
/// dataset entry, the whole dataset otherwise.
inline std::string context_for(const corpus::Dataset& dataset, const std::string& id) {
    return corpus::find_entry(dataset, id) ? corpus::leave_one_out_context(dataset, id)
                                           : corpus::full_context(dataset);
}

inline prompt::RenderedPrompt augmented_prompt_for(const prompt::TemplateSet& templates,
                                                   const corpus::Dataset& dataset,
                                                   const corpus::CorpusItem& item,
                                                   const std::optional<std::string>& note = {}) {
    const std::string ctx = context_for(dataset, item.id);
    std::optional<std::string_view> n;
    if (note) n = *note;
    return prompt::render_augmented(templates, item.source, ctx, n);
}

inline std::vector<Candidate> run_t2j_translation(llm::LlmClient& client,
                                                  const prompt::TemplateSet& templates,
                                                  const std::vector<corpus::CorpusItem>& items,
                                                  const corpus::Dataset& dataset,
                                                  const std::optional<std::string>& note = {}) {
    if (items.empty()) throw ArgumentError("run_t2j_translation: empty corpus");
    std::vector<prompt::RenderedPrompt> prompts;
    prompts.reserve(items.size());
    for (const auto& it : items) prompts.push_back(augmented_prompt_for(templates, dataset, it, note));
    std::vector<Candidate> out(items.size());
    client.log().ordered_for(items.size(), client.max_in_flight(), [&](std::size_t i) {
        out[i] = detail::translate_one(client, prompts[i]);
    });
    detail::log_translation(client, "t2j", items, out);
    return out;
}

// ---------------------------------------------------------------------------
// Scoring shared by both settings

namespace detail {

/// Fills CodeBLEU, the four rubric variants and the comparison score for
/// every non-excluded row. `sources[i]` belongs to `rows[i]`.
inline void score_rows(llm::LlmClient& client, const prompt::TemplateSet& templates,
                       const RunConfig& cfg, const std::vector<std::string>& sources,
                       std::vector<ExampleRow>& rows, std::vector<std::string>& notes) {
    // CodeBLEU
    for (auto& r : rows) {
        if (r.excluded || !r.reference) continue;
        if (r.baseline.code) {
            r.metrics[kCodeBleu].baseline =
                codebleu::codebleu(*r.baseline.code, *r.reference, cfg.codebleu).combined;
        }
        if (r.t2j.code) {
            r.metrics[kCodeBleu].t2j =
                codebleu::codebleu(*r.t2j.code, *r.reference, cfg.codebleu).combined;
        }
    }

    // Rubric variants
    for (bool t2j : {false, true}) {
        std::vector<corpus::EvalPair> pairs;
        std::vector<std::size_t> row_of;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& c = t2j ? rows[i].t2j : rows[i].baseline;
            if (rows[i].excluded || !c.code) continue;
            pairs.push_back({rows[i].id, sources[i], *c.code, rows[i].reference});
            row_of.push_back(i);
        }
        if (pairs.empty()) continue;
        for (auto kind : prompt::kJudgeKinds) {
            const std::size_t m = metric_index(kind);
            try {
                auto res = judge::codetrans_score(client, templates, pairs, kind);
                for (std::size_t k = 0; k < pairs.size(); ++k) {
                    auto& cell = rows[row_of[k]].metrics[m];
                    (t2j ? cell.t2j : cell.baseline) = res.record.per_item[k];
                }
                if (res.record.failures) {
                    notes.push_back(std::string(kMetrics[m]) + (t2j ? " (T2J)" : " (Baseline)") +
                                    ": " + std::to_string(res.record.failures) +
                                    " item(s) unparseable or failed");
                }
            } catch (const MetricError& e) {
                notes.push_back(e.what());
            }
        }
    }

    // Comparison in both directions over items with both candidates.
    std::vector<std::string> base, aug, src, ids;
    std::vector<std::size_t> row_of;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].excluded || !rows[i].baseline.code || !rows[i].t2j.code) continue;
        base.push_back(*rows[i].baseline.code);
        aug.push_back(*rows[i].t2j.code);
        src.push_back(sources[i]);
        ids.push_back(rows[i].id);
        row_of.push_back(i);
    }
    if (!src.empty()) {
        auto b = judge::comparison_score(client, templates, base, aug, src, cfg.seed,
                                         llm::Role::Costly, ids);
        auto t = judge::comparison_score(client, templates, aug, base, src, cfg.seed,
                                         llm::Role::Costly, ids);
        for (std::size_t k = 0; k < src.size(); ++k) {
            rows[row_of[k]].metrics[kComparison].baseline = b.record.per_item[k];
            rows[row_of[k]].metrics[kComparison].t2j = t.record.per_item[k];
        }
    }
}

inline ExperimentReport new_report(const std::string& setting, const RunConfig& cfg,
                                   const llm::LlmClient& client) {
    ExperimentReport r;
    r.setting = setting;
    r.seed = cfg.seed;
    r.provider = client.provider().name();
    r.config = cfg.echo;
    return r;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Intrinsic evaluation

/// Leave-one-out evaluation over the fixed-bug dataset. References are
/// required for every entry and checked before any model call.
inline ExperimentReport run_intrinsic(const RunConfig& cfg, llm::LlmClient& client,
                                      const prompt::TemplateSet& templates) {
    if (!cfg.dataset) throw ConfigError("intrinsic run needs config.dataset");
    if (!cfg.references) throw ConfigError("intrinsic run needs config.references");
    const corpus::Dataset dataset = corpus::load_dataset(*cfg.dataset);
    if (dataset.empty()) throw ConfigError("intrinsic run: dataset is empty");
    std::map<std::string, std::string> refs;
    for (auto& it : corpus::load_parallel_corpus(*cfg.references)) {
        if (it.reference) refs[it.id] = *it.reference;
    }
    std::vector<std::string> missing;
    for (const auto& e : dataset) {
        if (!refs.count(e.example_id)) missing.push_back(e.example_id);
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
        throw ConfigError("references missing for: " + list);
    }
    std::optional<corpus::Dataset> t2j_fixes;
    if (cfg.t2j_fixes) {
        t2j_fixes = corpus::load_dataset(*cfg.t2j_fixes);
        for (const auto& e : dataset) {
            if (!corpus::find_entry(*t2j_fixes, e.example_id)) {
                throw ConfigError("t2j_fixes has no entry for " + e.example_id);
            }
        }
    }
    (void)client.role(llm::Role::Cheap);
    (void)client.role(llm::Role::Costly);

    std::vector<corpus::CorpusItem> items;
    std::vector<std::string> sources;
    for (const auto& e : dataset) {
        items.push_back({e.example_id, e.input_code, refs.at(e.example_id)});
        sources.push_back(e.input_code);
    }

    auto report = detail::new_report("intrinsic", cfg, client);
    const auto base = run_baseline_translation(client, templates, items);
    const auto aug = run_t2j_translation(client, templates, items, dataset, cfg.data_note);
    for (std::size_t i = 0; i < items.size(); ++i) {
        ExampleRow row;
        row.id = items[i].id;
        row.reference = items[i].reference;
        row.baseline = base[i];
        row.t2j = aug[i];
        row.metrics[kFixCost].baseline = static_cast<double>(corpus::count_fix_steps(dataset[i]));
        if (t2j_fixes) {
            row.metrics[kFixCost].t2j = static_cast<double>(
                corpus::count_fix_steps(*corpus::find_entry(*t2j_fixes, row.id)));
        }
        report.rows.push_back(std::move(row));
    }
    detail::score_rows(client, templates, cfg, sources, report.rows, report.notes);
    report.summary = summarize(report.rows, true);
    return report;
}

// ---------------------------------------------------------------------------
// Extrinsic evaluation

namespace detail {

struct GroundTruth {
    std::optional<std::string> code;
    std::string error;
};

/// Costly-role standard translations, cached in `cache_path` keyed by item id
/// together with the model and prompt digest that produced them.
inline std::vector<GroundTruth> ground_truth(llm::LlmClient& client,
                                             const prompt::TemplateSet& templates,
                                             const std::vector<corpus::CorpusItem>& items,
                                             const fs::path& cache_path) {
    nlohmann::json cache = nlohmann::json::object();
    if (fs::exists(cache_path)) {
        cache = nlohmann::json::parse(io::read_file(cache_path), nullptr, false);
        if (!cache.is_object()) cache = nlohmann::json::object();
    }
    const std::string model = client.role(llm::Role::Costly).model_id;
    std::vector<prompt::RenderedPrompt> prompts;
    for (const auto& it : items) prompts.push_back(prompt::render_standard(templates, it.source));

    std::vector<GroundTruth> out(items.size());
    std::vector<bool> fresh(items.size(), false);
    client.log().ordered_for(items.size(), client.max_in_flight(), [&](std::size_t i) {
        const auto hit = cache.find(items[i].id);
        if (hit != cache.end() && hit->is_object() && hit->value("model", "") == model &&
            hit->value("prompt_digest", "") == prompts[i].inputs_digest && hit->contains("code")) {
            out[i].code = hit->at("code").get<std::string>();
            return;
        }
        try {
            auto x = client.complete(prompts[i], llm::Role::Costly);
            std::string code = llm::extract_code(x.response);
            if (code.empty()) {
                out[i].error = "no code in ground-truth response";
            } else {
                out[i].code = std::move(code);
                fresh[i] = true;
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            out[i].error = e.what();
        }
    });
    bool dirty = false;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!fresh[i]) continue;
        cache[items[i].id] = {{"model", model},
                              {"prompt_digest", prompts[i].inputs_digest},
                              {"code", *out[i].code}};
        dirty = true;
    }
    if (dirty) {
        fs::create_directories(cache_path.parent_path());
        io::atomic_write_file(cache_path, cache.dump(2) + "\n");
    }
    return out;
}

}  // namespace detail

/// Evaluation over an external corpus. The costly role's standard
/// translation is the reference; FixCost is not applicable.
inline ExperimentReport run_extrinsic(const RunConfig& cfg, llm::LlmClient& client,
                                      const prompt::TemplateSet& templates) {
    if (!cfg.external_corpus) throw ConfigError("extrinsic run needs config.external_corpus");
    if (!client.has_role(llm::Role::Costly)) {
        throw ConfigError("extrinsic run needs a costly role for ground truth");
    }
    (void)client.role(llm::Role::Cheap);
    const auto items = corpus::load_parallel_corpus(*cfg.external_corpus);
    if (items.empty()) throw ConfigError("extrinsic run: external corpus is empty");
    corpus::Dataset dataset;
    if (cfg.dataset) dataset = corpus::load_dataset(*cfg.dataset);

    auto report = detail::new_report("extrinsic", cfg, client);
    const auto truth =
        detail::ground_truth(client, templates, items, cfg.output_dir / "ground_truth_cache.json");

    std::vector<corpus::CorpusItem> usable;
    std::vector<std::size_t> row_of;
    for (std::size_t i = 0; i < items.size(); ++i) {
        ExampleRow row;
        row.id = items[i].id;
        if (truth[i].code) {
            row.reference = truth[i].code;
            usable.push_back(items[i]);
            row_of.push_back(i);
        } else {
            row.excluded = "ground truth unavailable: " + truth[i].error;
            ojson j;
            j["type"] = "exclusion";
            j["id"] = row.id;
            j["reason"] = *row.excluded;
            client.log().append(j);
        }
        report.rows.push_back(std::move(row));
    }
    std::vector<std::string> sources;
    for (const auto& it : items) sources.push_back(it.source);
    if (!usable.empty()) {
        const auto base = run_baseline_translation(client, templates, usable);
        const auto aug = run_t2j_translation(client, templates, usable, dataset, cfg.data_note);
        for (std::size_t k = 0; k < usable.size(); ++k) {
            report.rows[row_of[k]].baseline = base[k];
            report.rows[row_of[k]].t2j = aug[k];
        }
    }
    detail::score_rows(client, templates, cfg, sources, report.rows, report.notes);
    report.summary = summarize(report.rows, false);
    return report;
}

// ---------------------------------------------------------------------------
// Correlation against fixing cost

struct CorrelationRow {
    std::string metric;
    std::optional<double> pearson;
    std::optional<double> spearman;
    std::size_t n = 0;
};

/// Per-example fix-step counts of a dataset as a metric vector.
inline stats::MetricVector fixcost_vector(const corpus::Dataset& dataset) {
    stats::MetricVector v;
    v.metric = kMetrics[kFixCost];
    for (const auto& e : dataset) {
        v.ids.push_back(e.example_id);
        v.values.push_back(static_cast<double>(corpus::count_fix_steps(e)));
    }
    return v;
}

/// Pearson and Spearman of each metric column against `fixcost`, over the
/// rows where the metric is present. Fewer than two such rows, or a constant
/// vector, gives an undefined coefficient.
inline std::vector<CorrelationRow> correlate_against_fixcost(const ExperimentReport& report,
                                                             const stats::MetricVector& fixcost,
                                                             bool t2j_column = false) {
    stats::validate(fixcost);
    std::map<std::string, double> steps;
    for (std::size_t i = 0; i < fixcost.ids.size(); ++i) steps[fixcost.ids[i]] = fixcost.values[i];
    for (const auto& row : report.rows) {
        if (!row.excluded && !steps.count(row.id)) {
            throw ArgumentError("fix-cost vector has no value for example \"" + row.id + "\"");
        }
    }
    std::vector<CorrelationRow> out;
    for (std::size_t m = 0; m < kMetrics.size(); ++m) {
        if (m == kFixCost) continue;
        stats::MetricVector x{kMetrics[m], {}, {}};
        stats::MetricVector y{fixcost.metric, {}, {}};
        for (const auto& row : report.rows) {
            if (row.excluded) continue;
            const auto& v = t2j_column ? row.metrics[m].t2j : row.metrics[m].baseline;
            if (!v) continue;
            x.ids.push_back(row.id);
            x.values.push_back(*v);
            y.ids.push_back(row.id);
            y.values.push_back(steps.at(row.id));
        }
        CorrelationRow c{kMetrics[m], std::nullopt, std::nullopt, x.ids.size()};
        if (c.n >= 2) {
            c.pearson = stats::pearson(x, y);
            c.spearman = stats::spearman(x, y);
        }
        out.push_back(c);
    }
    return out;
}

inline ojson to_json(const std::vector<CorrelationRow>& rows) {
    ojson j = ojson::array();
    for (const auto& r : rows) {
        j.push_back({{"metric", r.metric},
                     {"pearson", detail::opt(r.pearson)},
                     {"spearman", detail::opt(r.spearman)},
                     {"n", r.n}});
    }
    return j;
}

inline std::string to_markdown(const std::vector<CorrelationRow>& rows) {
    auto fmt = [](const std::optional<double>& v) -> std::string {
        if (!v) return "NaN";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", *v);
        return buf;
    };
    std::ostringstream os;
    os << "| Metric | Pearson | Spearman |\n|---|---:|---:|\n";
    for (const auto& r : rows) {
        os << "| " << r.metric << " | " << fmt(r.pearson) << " | " << fmt(r.spearman) << " |\n";
    }
    return os.str();
}

}  // namespace t2j::experiments
