// Copyright (c) 2026, T2J harness contributors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mock_run.hpp"
#include "t2j/corpus.hpp"
#include "t2j/providers.hpp"
#include "t2j/stats.hpp"
#include "test_support.hpp"

using namespace t2j;
using namespace t2j::experiments;
using Catch::Matchers::WithinAbs;
using t2j_test::fixture;
using t2j_test::TempDir;

namespace {

const prompt::TemplateSet& templates() {
    static const auto t = prompt::TemplateSet::load(T2J_TEMPLATE_DIR);
    return t;
}

RunConfig config(const char* name, const TempDir& out) {
    auto cfg = load_run_config(fixture(name));
    cfg.output_dir = out.path();
    return cfg;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

// The intrinsic mock run is shared by several test cases.
const ExperimentReport& intrinsic_report() {
    static TempDir out;
    static const ExperimentReport r = [] {
        auto cfg = config("run_intrinsic.json", out);
        auto client = t2j_test::mock_client(cfg);
        return run_intrinsic(cfg, client, templates());
    }();
    return r;
}

}  // namespace

TEST_CASE("run config loading", "[experiments][config]") {
    const auto cfg = load_run_config(fixture("run_intrinsic.json"));
    CHECK(cfg.dataset == fixture("fixed_bugs_cheap.json"));
    CHECK(cfg.seed == 7);
    CHECK(cfg.timeout_seconds == 180.0);
    REQUIRE(cfg.roles.size() == 2);
    CHECK(cfg.echo["seed"] == 7);

    CHECK_THROWS_AS(parse_run_config("{\"roles\": {}, \"bogus\": 1}"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("{}"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("{\"roles\": {\"medium\": \"m\"}}"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("{\"roles\": {}, \"codebleu\": {\"weights\": [1, 1, 0, 0]}}"),
                    ConfigError);
    CHECK_THROWS_AS(parse_run_config("{\"roles\": {}, \"seed\": -1}"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("{\"roles\": "), ParseError);
    CHECK_THROWS_AS(load_run_config("/nonexistent/config.json"), ConfigError);

    const auto c = parse_run_config(
        R"({"roles": {"cheap": "a"}, "codebleu": {"weights": [0.1, 0.2, 0.3, 0.4], "max_n": 3,
             "keyword_weight": 2, "extra_keywords": ["jnp"]}, "output_dir": "/tmp/x"})");
    CHECK(c.codebleu.weights[3] == 0.4);
    CHECK(c.codebleu.max_n == 3);
    CHECK(c.codebleu.extra_keywords.count("jnp") == 1);
    CHECK(c.output_dir == "/tmp/x");
}

TEST_CASE("mock intrinsic run produces the full report", "[experiments][intrinsic]") {
    const auto& r = intrinsic_report();
    REQUIRE(r.rows.size() == 20);
    REQUIRE(r.summary.size() == 7);
    for (std::size_t m = 0; m < 7; ++m) CHECK(r.summary[m].metric == kMetrics[m]);
    CHECK(r.setting == "intrinsic");
    CHECK(r.provider == "mock");
    CHECK(r.seed == 7);

    const auto& fix = r.summary[kFixCost];
    CHECK(fix.baseline == 163.0);
    CHECK(fix.t2j == 87.0);
    CHECK(fix.n_baseline == 20);

    for (const auto& row : r.rows) {
        CHECK(row.baseline.code.has_value());
        CHECK(row.t2j.code.has_value());
        CHECK_FALSE(row.excluded.has_value());
        for (std::size_t m = 0; m < 7; ++m) {
            INFO(row.id << " " << kMetrics[m]);
            CHECK(row.metrics[m].baseline.has_value());
            CHECK(row.metrics[m].t2j.has_value());
        }
    }
    // the augmented prompt fixes the weak-model errors, so CodeBLEU improves
    CHECK(*r.summary[kCodeBleu].t2j > *r.summary[kCodeBleu].baseline);
    // comparison columns are complementary when the mock never ties on them
    for (const auto& row : r.rows) {
        const auto& c = row.metrics[kComparison];
        CHECK(*c.baseline + *c.t2j <= 1.0);
    }
}

TEST_CASE("summary is reproducible from the per-example CSV", "[experiments][property]") {
    const auto& r = intrinsic_report();
    const auto csv = to_csv(r);
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    const auto header = split(line, ',');
    REQUIRE(header.size() == 4 + 14);
    std::vector<std::vector<std::string>> rows;
    while (std::getline(is, line)) rows.push_back(split(line, ','));
    REQUIRE(rows.size() == r.rows.size());

    for (std::size_t m = 0; m < 7; ++m) {
        for (int col = 0; col < 2; ++col) {
            double sum = 0.0;
            std::size_t n = 0;
            for (const auto& row : rows) {
                if (row[1] == "1") continue;
                const auto& cell = row[4 + 2 * m + static_cast<std::size_t>(col)];
                if (cell.empty()) continue;
                sum += std::stod(cell);
                ++n;
            }
            const auto& s = r.summary[m];
            const auto expect = col == 0 ? s.baseline : s.t2j;
            REQUIRE(expect.has_value());
            const double got = m == kFixCost ? sum : sum / static_cast<double>(n);
            CHECK_THAT(got, WithinAbs(*expect, 1e-12));
        }
    }
}

TEST_CASE("report JSON round trips", "[experiments]") {
    const auto& r = intrinsic_report();
    TempDir tmp;
    emit_report(r, tmp.path());
    CHECK(load_report(tmp / "report.json") == r);
    CHECK(t2j_test::slurp(tmp / "per_example.csv") == to_csv(r));
    const auto md = t2j_test::slurp(tmp / "summary.md");
    CHECK(md.find("| T2J_FixCost_Score | 163 | 87 |") != std::string::npos);
    CHECK(md.find("## Intrinsic evaluation") == 0);
    CHECK_THROWS_AS(report_from_json(nlohmann::ordered_json::object()), ValidationError);
}

TEST_CASE("augmented prompts never contain their own example", "[experiments][property]") {
    TempDir out;
    auto cfg = config("run_intrinsic.json", out);
    auto rec = std::make_shared<t2j_test::RecordingProvider>(t2j_test::strong_models(cfg));
    auto client = t2j_test::mock_client(cfg, rec);
    run_intrinsic(cfg, client, templates());

    const auto dataset = corpus::load_dataset(*cfg.dataset);
    std::size_t checked = 0;
    for (const auto& p : rec->prompts()) {
        const auto ctx_at = p.find(prompt::kContextHeader);
        if (ctx_at == std::string::npos) continue;
        const std::string head = p.substr(0, ctx_at);
        for (const auto& e : dataset) {
            if (head.find(e.input_code) == std::string::npos) continue;
            CHECK(p.find("\"Example_id\": \"" + e.example_id + "\"") == std::string::npos);
            ++checked;
        }
    }
    CHECK(checked == dataset.size());
}

TEST_CASE("intrinsic run is deterministic under the mock", "[experiments][property]") {
    TempDir a, b;
    auto run = [](const TempDir& out) {
        auto cfg = config("run_intrinsic.json", out);
        auto log = std::make_shared<llm::RunLog>(out / "run_log.jsonl");
        auto client = t2j_test::mock_client(cfg, nullptr, log);
        emit_report(run_intrinsic(cfg, client, templates()), out.path());
    };
    run(a);
    run(b);
    for (const char* f : {"report.json", "per_example.csv", "summary.md", "run_log.jsonl"}) {
        INFO(f);
        CHECK(t2j_test::slurp(a / f) == t2j_test::slurp(b / f));
    }
}

TEST_CASE("missing references fail before any model call", "[experiments][intrinsic]") {
    TempDir out;
    auto cfg = config("run_intrinsic.json", out);
    auto refs = corpus::load_parallel_corpus(*cfg.references);
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 1; i < refs.size(); ++i) {
        arr.push_back({{"id", refs[i].id}, {"source", refs[i].source}, {"reference", *refs[i].reference}});
    }
    t2j_test::spit(out / "partial.json", arr.dump());
    cfg.references = out / "partial.json";

    auto rec = std::make_shared<t2j_test::RecordingProvider>(t2j_test::strong_models(cfg));
    auto client = t2j_test::mock_client(cfg, rec);
    try {
        run_intrinsic(cfg, client, templates());
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring(refs[0].id));
    }
    CHECK(rec->prompts().empty());

    cfg.references.reset();
    CHECK_THROWS_AS(run_intrinsic(cfg, client, templates()), ConfigError);
}

TEST_CASE("mock extrinsic run", "[experiments][extrinsic]") {
    TempDir out;
    auto cfg = config("run_extrinsic.json", out);
    auto client = t2j_test::mock_client(cfg);
    const auto r = run_extrinsic(cfg, client, templates());
    CHECK(r.setting == "extrinsic");
    CHECK(r.rows.size() == corpus::load_parallel_corpus(*cfg.external_corpus).size());
    CHECK(r.summary[kFixCost].not_applicable);
    CHECK(r.summary[kCodeBleu].baseline.has_value());
    CHECK(to_markdown(r).find("| T2J_FixCost_Score | N/A | N/A |") != std::string::npos);
    // references come from the costly role and are cached for the next run
    CHECK(std::filesystem::exists(out / "ground_truth_cache.json"));
    auto rec = std::make_shared<t2j_test::RecordingProvider>(t2j_test::strong_models(cfg));
    auto again = t2j_test::mock_client(cfg, rec);
    CHECK(run_extrinsic(cfg, again, templates()) == r);
    std::size_t standard = 0;
    for (const auto& p : rec->prompts()) {
        standard += p.find(prompt::kContextHeader) == std::string::npos &&
                    p.find("Input Source Code Snippet:") != std::string::npos;
    }
    CHECK(standard == r.rows.size());  // only the baseline, not the ground truth
}

TEST_CASE("extrinsic rows without ground truth are excluded", "[experiments][extrinsic]") {
    TempDir out;
    auto cfg = config("run_extrinsic.json", out);
    const auto items = corpus::load_parallel_corpus(*cfg.external_corpus);
    const std::string skip = items[1].source;
    const std::string costly = *t2j_test::strong_models(cfg).begin();
    auto inner = std::make_shared<llm::MockProvider>(t2j_test::strong_models(cfg));
    auto flaky = std::make_shared<llm::ScriptedProvider>([=](const llm::ChatRequest& q) {
        const bool standard = q.prompt.find(prompt::kContextHeader) == std::string::npos &&
                              q.prompt.find("Input Source Code Snippet:") != std::string::npos;
        if (q.model == costly && standard && q.prompt.find(skip) != std::string::npos) {
            throw llm::TransientFailure("unavailable");
        }
        return inner->complete(q);
    });
    auto client = t2j_test::mock_client(cfg, flaky);
    const auto r = run_extrinsic(cfg, client, templates());
    REQUIRE(r.rows[1].excluded.has_value());
    CHECK_FALSE(r.rows[0].excluded.has_value());
    CHECK(r.summary[kCodeBleu].n_baseline == r.rows.size() - 1);
    bool logged = false;
    for (const auto& l : client.log().lines()) {
        const auto j = nlohmann::json::parse(l);
        logged |= j["type"] == "exclusion" && j["id"] == items[1].id;
    }
    CHECK(logged);
}

TEST_CASE("correlation against fix cost", "[experiments][stats]") {
    const auto& r = intrinsic_report();
    const auto d = corpus::load_dataset(fixture("fixed_bugs_cheap.json"));
    const auto v = fixcost_vector(d);
    CHECK(v.values.size() == 20);
    const auto rows = correlate_against_fixcost(r, v);
    REQUIRE(rows.size() == 6);
    for (const auto& c : rows) {
        CHECK(c.n == 20);
        // recompute independently from the report columns
        std::vector<double> x, y;
        for (std::size_t i = 0; i < r.rows.size(); ++i) {
            const auto m = static_cast<std::size_t>(
                std::find(kMetrics.begin(), kMetrics.end(), c.metric) - kMetrics.begin());
            x.push_back(*r.rows[i].metrics[m].baseline);
            y.push_back(v.values[i]);
        }
        const auto p = stats::pearson(x, y);
        CHECK(p.has_value() == c.pearson.has_value());
        if (p) CHECK(*p == *c.pearson);
    }
    const auto md = to_markdown(rows);
    CHECK(md.find("| Metric | Pearson | Spearman |") == 0);

    stats::MetricVector partial = v;
    partial.ids.pop_back();
    partial.values.pop_back();
    CHECK_THROWS_AS(correlate_against_fixcost(r, partial), ArgumentError);
}
