// Copyright (c) 2026, T2J harness contributors
// SPDX-License-Identifier: Apache-2.0
//
// t2j: command-line front end.
//
// Exit codes: 0 success, 1 usage/validation/configuration error,
// 2 runtime or transport error.

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "t2j/t2j.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;
using namespace t2j;

namespace {

struct Common {
    std::string format = "text";
    bool json() const { return format == "json"; }
};

void add_format(CLI::App* cmd, Common& c) {
    cmd->add_option("--format", c.format, "Output format")
        ->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();
}

void print_json(const ojson& j) { std::cout << j.dump(2) << "\n"; }

std::string fmt_double(double v, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v, int prec = 4) {
    return v ? fmt_double(*v, prec) : std::string("absent");
}

/// "@path" reads the file, anything else is taken literally.
std::string value_or_file(const std::string& v) {
    if (!v.empty() && v[0] == '@') return io::read_file(v.substr(1));
    return v;
}

// -- client construction ------------------------------------------------------

struct ClientArgs {
    std::string config;
    std::string provider = "http";
    std::string model;
    std::string templates;
    std::size_t jobs = 0;
};

void add_client_options(CLI::App* cmd, ClientArgs& a, bool config_required) {
    auto* c = cmd->add_option("--config", a.config, "Run configuration (JSON)");
    if (config_required) c->required();
    c->check(CLI::ExistingFile);
    cmd->add_option("--provider", a.provider, "Model backend")
        ->check(CLI::IsMember({"http", "mock"}))
        ->capture_default_str();
    if (!config_required) {
        cmd->add_option("--model", a.model, "Model id for the role used by this command");
    }
    cmd->add_option("--templates", a.templates, "Prompt template directory");
    cmd->add_option("--jobs", a.jobs, "Concurrent requests per role (overrides the config)");
}

experiments::RunConfig config_from(const ClientArgs& a) {
    experiments::RunConfig cfg;
    if (!a.config.empty()) cfg = experiments::load_run_config(a.config);
    if (!a.templates.empty()) cfg.template_dir = a.templates;
    if (a.jobs > 0) cfg.max_in_flight = a.jobs;
    return cfg;
}

std::unique_ptr<llm::LlmClient> make_client(experiments::RunConfig& cfg, const ClientArgs& a,
                                            std::optional<llm::Role> model_role,
                                            std::shared_ptr<llm::RunLog> log) {
    if (model_role && !a.model.empty()) {
        auto it = std::find_if(cfg.roles.begin(), cfg.roles.end(),
                               [&](const llm::ModelRole& r) { return r.role == *model_role; });
        if (it == cfg.roles.end()) {
            cfg.roles.push_back({*model_role, a.model, {}});
        } else {
            it->model_id = a.model;
        }
    }
    if (cfg.roles.empty()) throw ConfigError("no model configured (use --config or --model)");
    llm::ClientOptions opts;
    opts.max_attempts = cfg.max_attempts;
    opts.max_in_flight = cfg.max_in_flight;
    std::shared_ptr<llm::Provider> provider;
    if (a.provider == "mock") {
        std::set<std::string> strong;
        for (const auto& r : cfg.roles) {
            if (r.role == llm::Role::Costly) strong.insert(r.model_id);
        }
        provider = std::make_shared<llm::MockProvider>(strong);
        // Reports from the mock must not depend on wall time.
        opts.clock = [] { return 0.0; };
        opts.base_backoff = std::chrono::milliseconds(0);
    } else {
        provider = llm::HttpProvider::from_env();
    }
    return std::make_unique<llm::LlmClient>(provider, cfg.roles, opts, std::move(log));
}

// -- dataset -----------------------------------------------------------------

int cmd_dataset_validate(const std::string& file, const Common& c) {
    const auto dataset = corpus::load_dataset(file);
    std::vector<std::string> problems;
    for (const auto& e : dataset) {
        for (const auto& v : corpus::validate_entry(e)) problems.push_back(e.example_id + ": " + v);
    }
    if (c.json()) {
        print_json({{"file", file}, {"entries", dataset.size()}, {"valid", problems.empty()},
                    {"problems", problems}});
    } else if (problems.empty()) {
        std::cout << file << ": " << dataset.size() << " entries, valid\n";
    } else {
        for (const auto& p : problems) std::cout << file << ": " << p << "\n";
    }
    if (!problems.empty()) {
        throw ValidationError(std::to_string(problems.size()) + " invalid field(s) in " + file);
    }
    return 0;
}

int cmd_dataset_stats(const std::string& file, const Common& c) {
    const auto dataset = corpus::load_dataset(file);
    const auto s = corpus::dataset_stats(dataset);
    std::map<std::string, std::size_t> categories;
    for (const auto& e : dataset) {
        if (e.category) ++categories[*e.category];
    }
    if (c.json()) {
        ojson j{{"entries", dataset.size()}, {"min", s.minimum},   {"max", s.maximum},
                {"mean", s.mean},            {"median", s.median}, {"total", s.total}};
        j["categories"] = categories;
        print_json(j);
        return 0;
    }
    std::cout << "entries " << dataset.size() << "\n"
              << "min     " << s.minimum << "\n"
              << "max     " << s.maximum << "\n"
              << "mean    " << fmt_double(s.mean, 2) << "\n"
              << "median  " << fmt_double(s.median, 1) << "\n"
              << "total   " << s.total << "\n";
    if (!categories.empty()) {
        std::cout << "categories\n";
        for (const auto& [k, n] : categories) std::cout << "  " << k << ": " << n << "\n";
    }
    return 0;
}

/// Reads a field from the terminal; multi-line values end with a lone ".".
std::string prompt_field(const std::string& label) {
    std::cerr << label << " (end with a line containing only \".\"):\n";
    std::string out, line;
    bool first = true;
    while (std::getline(std::cin, line)) {
        if (line == ".") break;
        if (!first) out += '\n';
        out += line;
        first = false;
    }
    return out;
}

struct RecordFixArgs {
    std::string file, id;
    std::optional<std::string> error_code, error, fix_info, fixed_code;
};

int cmd_record_fix(const RecordFixArgs& a, const Common& c) {
    corpus::FixStep step;
    step.error_code = a.error_code ? value_or_file(*a.error_code) : prompt_field("Error_Code");
    step.error_message = a.error ? value_or_file(*a.error) : prompt_field("Error");
    step.fix_info = a.fix_info ? value_or_file(*a.fix_info) : prompt_field("Fix_info");
    step.fixed_code = a.fixed_code ? value_or_file(*a.fixed_code) : prompt_field("Fixed_Code");
    const auto entry = corpus::append_fix_step(a.file, a.id, step);
    if (c.json()) {
        print_json({{"id", entry.example_id}, {"steps", corpus::count_fix_steps(entry)}});
    } else {
        std::cout << entry.example_id << ": recorded fix step " << corpus::count_fix_steps(entry)
                  << "\n";
    }
    return 0;
}

// -- single-item commands ------------------------------------------------------

struct TranslateArgs {
    ClientArgs client;
    std::string input;
    std::string prompt = "standard";
    std::string dataset;
    std::string id;
};

int cmd_translate(const TranslateArgs& a, const Common& c) {
    auto cfg = config_from(a.client);
    const auto templates = prompt::TemplateSet::load(cfg.template_dir);
    const std::string source = io::read_file(a.input);
    prompt::RenderedPrompt p;
    if (a.prompt == "augmented") {
        std::string ds = a.dataset;
        if (ds.empty() && cfg.dataset) ds = cfg.dataset->string();
        if (ds.empty()) throw ConfigError("augmented prompt needs --dataset");
        const auto dataset = corpus::load_dataset(ds);
        const std::string id = a.id.empty() ? fs::path(a.input).stem().string() : a.id;
        p = experiments::augmented_prompt_for(templates, dataset, {id, source, std::nullopt},
                                              cfg.data_note);
    } else {
        p = prompt::render_standard(templates, source);
    }
    auto client = make_client(cfg, a.client, llm::Role::Cheap, nullptr);
    const auto x = client->complete(p, llm::Role::Cheap);
    const std::string code = llm::extract_code(x.response);
    if (c.json()) {
        print_json({{"prompt", prompt::to_string(p.kind)},
                    {"model", x.model_id},
                    {"prompt_digest", p.inputs_digest},
                    {"code", code},
                    {"response", x.response}});
    } else {
        std::cout << code << "\n";
    }
    return 0;
}

struct JudgeArgs {
    ClientArgs client;
    std::string variant;
    std::string source, candidate, reference;
};

int cmd_judge(const JudgeArgs& a, const Common& c) {
    auto cfg = config_from(a.client);
    const auto templates = prompt::TemplateSet::load(cfg.template_dir);
    const auto kind = prompt::kind_from_string(a.variant);
    if (!kind || !prompt::is_judge_kind(*kind)) {
        throw ArgumentError("--variant must be one of codetrans_use_ref, codetrans_func_ref, "
                            "codetrans_use_noref, codetrans_func_noref");
    }
    corpus::EvalPair pair{fs::path(a.candidate).stem().string(), io::read_file(a.source),
                          io::read_file(a.candidate), std::nullopt};
    if (!a.reference.empty()) pair.reference_code = io::read_file(a.reference);
    auto client = make_client(cfg, a.client, llm::Role::Costly, nullptr);
    const auto res = judge::codetrans_score(*client, templates, {pair}, *kind);
    const auto& v = res.verdicts.front();
    if (c.json()) {
        print_json({{"metric", res.record.metric},
                    {"score", res.record.aggregate ? ojson(*res.record.aggregate) : ojson(nullptr)},
                    {"queries", v.queries},
                    {"response", v.raw_response}});
    } else {
        std::cout << res.record.metric << ": " << fmt_opt(res.record.aggregate, 0) << "\n";
    }
    return 0;
}

struct CompareArgs {
    ClientArgs client;
    std::string source, a, b;
    std::uint64_t seed = 0;
};

int cmd_compare(const CompareArgs& a, const Common& c) {
    auto cfg = config_from(a.client);
    const auto templates = prompt::TemplateSet::load(cfg.template_dir);
    auto client = make_client(cfg, a.client, llm::Role::Costly, nullptr);
    const auto res = judge::comparison_score(*client, templates, {io::read_file(a.a)},
                                             {io::read_file(a.b)}, {io::read_file(a.source)},
                                             a.seed);
    const auto& v = res.verdicts.front();
    std::string preferred = "none";
    if (v.choice && *v.choice != judge::Choice::Tie) {
        preferred = (*v.choice == judge::Choice::A) != v.swapped ? "a" : "b";
    } else if (v.choice) {
        preferred = "tie";
    }
    if (c.json()) {
        print_json({{"score", res.score},
                    {"preferred", preferred},
                    {"swapped", v.swapped},
                    {"seed", a.seed},
                    {"response", v.raw_response}});
    } else {
        std::cout << "preferred: " << preferred << "\nscore: " << res.score << "\n";
    }
    return 0;
}

struct CodeBleuArgs {
    std::string candidate, reference;
    std::vector<double> weights;
    double keyword_weight = 5.0;
    std::size_t max_n = 4;
    std::string keywords_file;
};

int cmd_codebleu(const CodeBleuArgs& a, const Common& c) {
    codebleu::CodeBleuConfig cfg;
    if (!a.weights.empty()) {
        if (a.weights.size() != 4) throw ArgumentError("--weights takes four numbers");
        std::copy(a.weights.begin(), a.weights.end(), cfg.weights.begin());
    }
    cfg.keyword_weight = a.keyword_weight;
    cfg.max_n = a.max_n;
    if (!a.keywords_file.empty()) {
        std::istringstream in(io::read_file(a.keywords_file));
        for (std::string w; in >> w;) cfg.extra_keywords.insert(w);
    }
    const auto b =
        codebleu::codebleu(io::read_file(a.candidate), io::read_file(a.reference), cfg);
    if (c.json()) {
        print_json(codebleu::to_json(b));
    } else {
        std::cout << "ngram           " << fmt_double(b.ngram) << "\n"
                  << "weighted_ngram  " << fmt_double(b.weighted_ngram) << "\n"
                  << "syntax          " << fmt_opt(b.syntax) << "\n"
                  << "dataflow        " << fmt_opt(b.dataflow) << "\n"
                  << "combined        " << fmt_double(b.combined) << "\n";
    }
    return 0;
}

// -- experiments ------------------------------------------------------------------

struct ExperimentArgs {
    ClientArgs client;
    std::string output_dir;
};

int cmd_experiment(const std::string& setting, const ExperimentArgs& a, const Common& c) {
    auto cfg = config_from(a.client);
    if (!a.output_dir.empty()) cfg.output_dir = a.output_dir;
    const auto templates = prompt::TemplateSet::load(cfg.template_dir);
    fs::create_directories(cfg.output_dir);
    auto log = std::make_shared<llm::RunLog>(cfg.output_dir / "run_log.jsonl");
    auto client = make_client(cfg, a.client, std::nullopt, log);
    const auto report = setting == "intrinsic"
                            ? experiments::run_intrinsic(cfg, *client, templates)
                            : experiments::run_extrinsic(cfg, *client, templates);
    experiments::emit_report(report, cfg.output_dir);
    if (c.json()) {
        print_json(experiments::to_json(report));
    } else {
        std::cout << experiments::to_markdown(report) << "\nwrote " << cfg.output_dir.string()
                  << "/{report.json,per_example.csv,summary.md,run_log.jsonl}\n";
    }
    return 0;
}

struct TimingArgs {
    std::vector<std::string> sets;
    double timeout = 180.0;
    std::string runner;
    std::string output_dir;
};

int cmd_timing(const TimingArgs& a, const Common& c) {
    const auto runner = runner::resolve_runner(
        a.runner.empty() ? std::nullopt : std::optional<fs::path>(a.runner));
    std::vector<runner::SnippetSet> sets;
    for (const auto& spec : a.sets) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ArgumentError("--set expects NAME=DIRECTORY, got \"" + spec + "\"");
        }
        runner::SnippetSet s;
        s.name = spec.substr(0, eq);
        const fs::path dir = spec.substr(eq + 1);
        if (!fs::is_directory(dir)) throw ConfigError(dir.string() + " is not a directory");
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(dir)) {
            if (e.is_regular_file()) files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) s.items.emplace_back(f.stem().string(), f);
        sets.push_back(std::move(s));
    }
    const auto table = runner::run_timing(runner, sets, a.timeout);
    if (!a.output_dir.empty()) {
        fs::create_directories(a.output_dir);
        io::atomic_write_file(fs::path(a.output_dir) / "timing.json",
                              runner::to_json(table).dump(2) + "\n");
        io::atomic_write_file(fs::path(a.output_dir) / "timing.md", runner::to_markdown(table));
    }
    if (c.json()) {
        print_json(runner::to_json(table));
    } else {
        std::cout << runner::to_markdown(table);
    }
    return 0;
}

struct CorrArgs {
    std::string report, dataset;
    std::string column = "baseline";
};

int cmd_corr(const CorrArgs& a, const Common& c) {
    const auto report = experiments::load_report(a.report);
    const auto dataset = corpus::load_dataset(a.dataset);
    const auto rows = experiments::correlate_against_fixcost(
        report, experiments::fixcost_vector(dataset), a.column == "t2j");
    if (c.json()) {
        print_json(experiments::to_json(rows));
    } else {
        std::cout << experiments::to_markdown(rows);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"t2j: PyTorch-to-JAX translation and evaluation harness"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "t2j 1.0.0");
    Common common;
    std::function<int()> action;

    // dataset
    auto* dataset = app.add_subcommand("dataset", "Fixed-bug dataset tools");
    dataset->require_subcommand(1);
    std::string ds_file;
    auto* validate = dataset->add_subcommand("validate", "Check a dataset file");
    validate->add_option("file", ds_file, "Dataset JSON")->required();
    add_format(validate, common);
    validate->callback([&] { action = [&] { return cmd_dataset_validate(ds_file, common); }; });

    auto* ds_stats = dataset->add_subcommand("stats", "Fix-step statistics");
    ds_stats->add_option("file", ds_file, "Dataset JSON")->required();
    add_format(ds_stats, common);
    ds_stats->callback([&] { action = [&] { return cmd_dataset_stats(ds_file, common); }; });

    RecordFixArgs rf;
    auto* record = dataset->add_subcommand(
        "record-fix", "Append one fix step to an entry; missing fields are read from stdin");
    record->add_option("file", rf.file, "Dataset JSON")->required();
    record->add_option("--id", rf.id, "Example_id of the entry")->required();
    record->add_option("--error-code", rf.error_code, "Offending code (or @file)");
    record->add_option("--error", rf.error, "Error message (or @file)");
    record->add_option("--fix-info", rf.fix_info, "How the error was fixed (or @file)");
    record->add_option("--fixed-code", rf.fixed_code, "Replacement code (or @file)");
    add_format(record, common);
    record->callback([&] { action = [&] { return cmd_record_fix(rf, common); }; });

    // translate
    TranslateArgs tr;
    auto* translate = app.add_subcommand("translate", "Translate one PyTorch file");
    translate->add_option("--input", tr.input, "PyTorch source file")
        ->required()
        ->check(CLI::ExistingFile);
    translate->add_option("--prompt", tr.prompt, "Prompt type")
        ->check(CLI::IsMember({"standard", "augmented"}))
        ->capture_default_str();
    translate->add_option("--dataset", tr.dataset, "Fixed-bug dataset for the augmented prompt");
    translate->add_option("--id", tr.id, "Example id (entries with this id are left out)");
    add_client_options(translate, tr.client, false);
    add_format(translate, common);
    translate->callback([&] { action = [&] { return cmd_translate(tr, common); }; });

    // judge
    JudgeArgs jd;
    auto* judge_cmd = app.add_subcommand("judge", "Rubric score for one translation");
    judge_cmd->add_option("--variant", jd.variant, "Judge template")->required();
    judge_cmd->add_option("--source", jd.source, "PyTorch source")->required()->check(CLI::ExistingFile);
    judge_cmd->add_option("--candidate", jd.candidate, "Translated JAX code")
        ->required()
        ->check(CLI::ExistingFile);
    judge_cmd->add_option("--reference", jd.reference, "Reference JAX code")
        ->check(CLI::ExistingFile);
    add_client_options(judge_cmd, jd.client, false);
    add_format(judge_cmd, common);
    judge_cmd->callback([&] { action = [&] { return cmd_judge(jd, common); }; });

    // compare
    CompareArgs cp;
    auto* compare = app.add_subcommand("compare", "Ask the judge which of two translations is better");
    compare->add_option("--source", cp.source, "PyTorch source")->required()->check(CLI::ExistingFile);
    compare->add_option("--a", cp.a, "First candidate")->required()->check(CLI::ExistingFile);
    compare->add_option("--b", cp.b, "Second candidate")->required()->check(CLI::ExistingFile);
    compare->add_option("--seed", cp.seed, "Slot-assignment seed")->capture_default_str();
    add_client_options(compare, cp.client, false);
    add_format(compare, common);
    compare->callback([&] { action = [&] { return cmd_compare(cp, common); }; });

    // codebleu
    CodeBleuArgs cb;
    auto* cbcmd = app.add_subcommand("codebleu", "CodeBLEU between two snippets");
    cbcmd->add_option("--candidate", cb.candidate, "Candidate file")
        ->required()
        ->check(CLI::ExistingFile);
    cbcmd->add_option("--reference", cb.reference, "Reference file")
        ->required()
        ->check(CLI::ExistingFile);
    cbcmd->add_option("--weights", cb.weights, "Four component weights")->delimiter(',');
    cbcmd->add_option("--keyword-weight", cb.keyword_weight, "Weight of keyword tokens")
        ->capture_default_str();
    cbcmd->add_option("--max-n", cb.max_n, "Largest n-gram order")->capture_default_str();
    cbcmd->add_option("--keywords", cb.keywords_file,
                      "File of extra identifiers to weight as keywords")
        ->check(CLI::ExistingFile);
    add_format(cbcmd, common);
    cbcmd->callback([&] { action = [&] { return cmd_codebleu(cb, common); }; });

    // intrinsic / extrinsic
    ExperimentArgs in_args, ex_args;
    auto* intrinsic = app.add_subcommand("intrinsic", "Leave-one-out evaluation on the dataset");
    add_client_options(intrinsic, in_args.client, true);
    intrinsic->add_option("--output-dir", in_args.output_dir, "Overrides config.output_dir");
    add_format(intrinsic, common);
    intrinsic->callback(
        [&] { action = [&] { return cmd_experiment("intrinsic", in_args, common); }; });

    auto* extrinsic = app.add_subcommand("extrinsic", "Evaluation on an external corpus");
    add_client_options(extrinsic, ex_args.client, true);
    extrinsic->add_option("--output-dir", ex_args.output_dir, "Overrides config.output_dir");
    add_format(extrinsic, common);
    extrinsic->callback(
        [&] { action = [&] { return cmd_experiment("extrinsic", ex_args, common); }; });

    // timing
    TimingArgs tm;
    auto* timing = app.add_subcommand("timing", "Run snippet sets through the runner and time them");
    timing->add_option("--set", tm.sets, "NAME=DIRECTORY of snippets (repeatable)")->required();
    timing->add_option("--timeout", tm.timeout, "Per-snippet timeout in seconds")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    timing->add_option("--runner", tm.runner, "Runner executable");
    timing->add_option("--output-dir", tm.output_dir, "Write timing.json and timing.md here");
    add_format(timing, common);
    timing->callback([&] { action = [&] { return cmd_timing(tm, common); }; });

    // corr
    CorrArgs cr;
    auto* corr = app.add_subcommand("corr", "Correlate report metrics with fix-step counts");
    corr->add_option("--report", cr.report, "report.json")->required()->check(CLI::ExistingFile);
    corr->add_option("--dataset", cr.dataset, "Fixed-bug dataset")->required()->check(CLI::ExistingFile);
    corr->add_option("--column", cr.column, "Which candidate column to correlate")
        ->check(CLI::IsMember({"baseline", "t2j"}))
        ->capture_default_str();
    add_format(corr, common);
    corr->callback([&] { action = [&] { return cmd_corr(cr, common); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        return action ? action() : 1;
    } catch (const Error& e) {
        std::cerr << "t2j: error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "t2j: error: " << e.what() << "\n";
        return 2;
    }
}
