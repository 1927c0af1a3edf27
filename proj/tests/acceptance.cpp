// Copyright (c) 2026, T2J harness contributors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mock_run.hpp"
#include "oracles.hpp"
#include "t2j/codebleu/codebleu.hpp"
#include "t2j/corpus.hpp"
#include "t2j/judge.hpp"
#include "t2j/prompt.hpp"
#include "t2j/providers.hpp"
#include "t2j/stats.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace t2j;
using t2j_test::fixture;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

const prompt::TemplateSet& templates() {
    static const auto t = prompt::TemplateSet::load(T2J_TEMPLATE_DIR);
    return t;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

Outcome codebleu_identity() {
    const auto t0 = Clock::now();
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(fixture("codebleu"))) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::size_t ok = 0;
    double worst = 0.0;
    for (const auto& f : files) {
        const auto code = t2j_test::slurp(f);
        const double d = std::abs(codebleu::codebleu(code, code).combined - 1.0);
        worst = std::max(worst, d);
        ok += d <= 1e-9;
    }
    const double secs = seconds_since(t0);
    std::ostringstream os;
    os << ok << "/" << files.size() << " snippets within 1e-9 (max deviation " << worst << "), "
       << secs << " s";
    return {files.size() == 10 && ok == 10 && secs < 5.0, os.str()};
}

Outcome codebleu_oracle() {
    std::size_t ok = 0;
    const auto& pairs = t2j_test::oracle_pairs();
    for (const auto& p : pairs) {
        const auto lines = [](const std::string& s) {
            return 1 + static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
        };
        if (lines(p.cand) > 10 || lines(p.ref) > 10) continue;
        const auto c = codebleu::tokenize(p.cand);
        const auto r = codebleu::tokenize(p.ref);
        const auto oc = t2j_test::split_ws(p.cand);
        const auto orf = t2j_test::split_ws(p.ref);
        auto pc = codebleu::parse_python(p.cand);
        auto pr = codebleu::parse_python(p.ref);
        if (!pc || !pr) continue;
        const auto df = codebleu::dataflow_match(*pc.tree, *pr.tree);
        const bool match = codebleu::ngram_match(c, r) == t2j_test::oracle_ngram(oc, orf) &&
                           codebleu::weighted_ngram_match(c, r) ==
                               t2j_test::oracle_weighted(oc, orf) &&
                           df && *df == t2j_test::oracle_dataflow(p.cand_flow, p.ref_flow);
        ok += match;
    }
    std::ostringstream os;
    os << ok << "/" << pairs.size() << " pairs exact on ngram, weighted ngram and dataflow";
    return {pairs.size() == 10 && ok == 10, os.str()};
}

Outcome fixcost() {
    const auto d = corpus::load_dataset(fixture("fixed_bugs_cheap.json"));
    const auto s = corpus::dataset_stats(d);
    const auto f = judge::fixcost_score(d);
    std::ostringstream os;
    os << "n " << f.n << ", total " << f.total << ", mean " << f.mean << ", min " << s.minimum
       << ", max " << s.maximum << ", median " << s.median;
    const bool fixture_ok = f.n == 20 && s.minimum == 1 && s.maximum == 32 && s.median == 5.0;
    return {fixture_ok && f.total == 163 && std::abs(f.mean - 8.15) <= 0.005, os.str()};
}

Outcome comparison() {
    std::vector<std::string> one, two, src;
    for (int i = 0; i < 100; ++i) {
        one.push_back("ONE_" + std::to_string(i));
        two.push_back("TWO_" + std::to_string(i));
        src.push_back("SRC_" + std::to_string(i));
    }
    auto provider = std::make_shared<llm::ScriptedProvider>([](const llm::ChatRequest& q) {
        const auto& p = q.prompt;
        const int item = std::stoi(p.substr(p.find("SRC_") + 4));
        const bool one_in_a = p.find("ONE_", p.find("Translated Code A:")) <
                              p.find("Translated Code B:");
        const bool say_a = (item < 82) == one_in_a;
        return std::string(say_a ? "Candidate A is better." : "Candidate B is better.");
    });
    llm::ClientOptions o;
    o.base_backoff = std::chrono::milliseconds(0);
    llm::LlmClient client(provider, {{llm::Role::Costly, "judge", {}}}, o);
    const auto r = judge::comparison_score(client, templates(), one, two, src, 2026);
    std::ostringstream os;
    os << "score " << r.score;
    return {r.score == 0.82, os.str()};
}

Outcome loo_exclusion() {
    t2j_test::TempDir out;
    auto cfg = experiments::load_run_config(fixture("run_intrinsic.json"));
    cfg.output_dir = out.path();
    auto rec = std::make_shared<t2j_test::RecordingProvider>(t2j_test::strong_models(cfg));
    auto client = t2j_test::mock_client(cfg, rec);
    experiments::run_intrinsic(cfg, client, templates());
    const auto dataset = corpus::load_dataset(*cfg.dataset);
    std::size_t seen = 0, clean = 0;
    for (const auto& e : dataset) {
        for (const auto& p : rec->prompts()) {
            const auto ctx = p.find(prompt::kContextHeader);
            if (ctx == std::string::npos) continue;
            if (p.substr(0, ctx).find(e.input_code) == std::string::npos) continue;
            ++seen;
            clean += p.find("\"Example_id\": \"" + e.example_id + "\"") == std::string::npos;
        }
    }
    std::ostringstream os;
    os << clean << "/" << seen << " augmented prompts exclude their own example";
    return {seen == 20 && clean == 20, os.str()};
}

Outcome golden_prompts() {
    auto s = [](const char* n) { return std::string("<<SENTINEL:") + n + ">>"; };
    const corpus::EvalPair pair{"p", s("SOURCE_CODE"), s("TRANSLATED_CODE"), s("REFERENCE")};
    std::size_t ok = 0;
    for (auto k : prompt::kAllKinds) {
        prompt::RenderedPrompt r;
        switch (k) {
            case prompt::PromptKind::Standard: r = prompt::render_standard(templates(), s("CODE")); break;
            case prompt::PromptKind::Augmented:
                r = prompt::render_augmented(templates(), s("CODE"), "[]");
                break;
            case prompt::PromptKind::Comparison:
                r = prompt::render_comparison(templates(), s("CODE"), s("TRANSLATE_CODE_A"),
                                              s("TRANSLATE_CODE_B"));
                break;
            default: r = prompt::render_judge(templates(), k, pair);
        }
        const auto golden = t2j_test::golden(std::string(prompt::to_string(k)) + ".rendered.txt");
        ok += fs::exists(golden) && r.text == t2j_test::slurp(golden);
    }
    std::ostringstream os;
    os << ok << "/" << prompt::kAllKinds.size() << " prompt kinds byte-identical";
    return {ok == prompt::kAllKinds.size() && ok == 7, os.str()};
}

Outcome correlation() {
    std::size_t ok = 0;
    double worst = 0.0;
    const auto cases = t2j_test::corr_cases();
    for (const auto& c : cases) {
        const auto p = stats::pearson(c.x, c.y);
        const auto s = stats::spearman(c.x, c.y);
        if (!p || !s) continue;
        const double d = std::max(std::abs(*p - c.pearson), std::abs(*s - c.spearman));
        worst = std::max(worst, d);
        ok += d <= 1e-12;
    }
    const bool undefined = !stats::pearson({2, 2, 2, 2}, {1, 2, 3, 4}) &&
                           !stats::spearman({1, 2, 3, 4}, {5, 5, 5, 5});
    std::ostringstream os;
    os << ok << "/" << cases.size() << " vectors within 1e-12 (max deviation " << worst
       << "), constant input " << (undefined ? "Undefined" : "defined");
    return {cases.size() == 5 && ok == 5 && undefined, os.str()};
}

Outcome reproducible_run() {
    t2j_test::TempDir tmp;
    double slowest = 0.0;
    for (const char* run : {"run1", "run2"}) {
        const auto t0 = Clock::now();
        const auto r = t2j_test::run_cli("intrinsic --provider mock --config '" +
                                         fixture("run_intrinsic.json").string() +
                                         "' --output-dir '" + (tmp / run).string() + "'");
        slowest = std::max(slowest, seconds_since(t0));
        if (r.exit_code != 0) {
            return {false, std::string(run) + " exited " + std::to_string(r.exit_code)};
        }
    }
    std::size_t same = 0;
    const char* files[] = {"report.json", "per_example.csv", "summary.md", "run_log.jsonl"};
    for (const char* f : files) {
        const auto a = tmp / "run1" / f;
        const auto b = tmp / "run2" / f;
        same += fs::exists(a) && fs::exists(b) && t2j_test::slurp(a) == t2j_test::slurp(b);
    }
    std::ostringstream os;
    os << same << "/4 output files byte-identical, slowest run " << slowest << " s";
    return {same == 4 && slowest < 60.0, os.str()};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"codebleu-identity", codebleu_identity},
        {"codebleu-oracle", codebleu_oracle},
        {"fixcost-fixture", fixcost},
        {"comparison-82-of-100", comparison},
        {"loo-exclusion", loo_exclusion},
        {"golden-prompts", golden_prompts},
        {"correlation-closed-forms", correlation},
        {"mock-run-reproducible", reproducible_run},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    }
    return failures;
}
