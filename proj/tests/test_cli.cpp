// Copyright (c) 2026, T2J harness contributors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <string>

#include <json.hpp>

#include "t2j/corpus.hpp"
#include "test_support.hpp"

using t2j_test::fixture;
using t2j_test::run_cli;
using t2j_test::TempDir;
namespace fs = std::filesystem;

namespace {

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("cli exit codes", "[cli]") {
    CHECK(run_cli("--help").exit_code == 0);
    CHECK(run_cli("--version").exit_code == 0);
    CHECK(run_cli("").exit_code == 1);
    CHECK(run_cli("dataset stats --no-such-flag x").exit_code == 1);
    CHECK(run_cli("dataset stats /nonexistent/file.json").exit_code == 1);
    CHECK(run_cli("frobnicate").exit_code == 1);
}

TEST_CASE("errors are reported on stderr", "[cli]") {
    TempDir tmp;
    t2j_test::spit(tmp / "bad.json", "[{\"Example_id\": }]");
    const auto r = run_cli("dataset validate " + q(tmp / "bad.json"), "", tmp / "err.txt");
    CHECK(r.exit_code == 1);
    CHECK(r.out.empty());
    CHECK(t2j_test::slurp(tmp / "err.txt").rfind("t2j: error: ", 0) == 0);
}

TEST_CASE("dataset stats", "[cli]") {
    const auto r = run_cli("dataset stats " + q(fixture("fixed_bugs_cheap.json")));
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("total   163\n") != std::string::npos);
    CHECK(r.out.find("mean    8.15\n") != std::string::npos);
    CHECK(r.out.find("median  5.0\n") != std::string::npos);

    const auto j = run_cli("dataset stats --format json " + q(fixture("fixed_bugs_cheap.json")));
    REQUIRE(j.exit_code == 0);
    const auto doc = nlohmann::json::parse(j.out);
    CHECK(doc["total"] == 163);
    CHECK(doc["min"] == 1);
    CHECK(doc["max"] == 32);
}

TEST_CASE("dataset validate", "[cli]") {
    CHECK(run_cli("dataset validate " + q(fixture("fixed_bugs_costly.json"))).exit_code == 0);
    TempDir tmp;
    t2j_test::spit(tmp / "d.json",
                   R"([{"Example_id": "x", "Input_Code": "p", "LLM_weak_output": "w", "LLM_fix_output": "f", "Errors": []}])");
    const auto r = run_cli("dataset validate " + q(tmp / "d.json"), "", tmp / "err.txt");
    CHECK(r.exit_code == 1);
    CHECK(t2j_test::slurp(tmp / "err.txt").find("\"x\"") != std::string::npos);
}

TEST_CASE("dataset record-fix from flags and stdin", "[cli]") {
    TempDir tmp;
    fs::copy_file(fixture("fixed_bugs_cheap.json"), tmp / "d.json");
    const auto before = t2j::corpus::load_dataset(tmp / "d.json");
    const auto n0 = t2j::corpus::count_fix_steps(*t2j::corpus::find_entry(before, "e1"));

    const auto r = run_cli("dataset record-fix " + q(tmp / "d.json") +
                           " --id e1 --error-code 'y = 1' --error 'NameError: y' "
                           "--fix-info 'renamed' --fixed-code 'z = 1'");
    REQUIRE(r.exit_code == 0);
    t2j_test::spit(tmp / "fixed.py", "a = 1\nb = 2");
    const auto s = run_cli("dataset record-fix --format json " + q(tmp / "d.json") +
                               " --id e1 --fixed-code @" + (tmp / "fixed.py").string(),
                           "line one\nline two\n.\nTypeError: bad\n.\nadjusted call\n.\n");
    REQUIRE(s.exit_code == 0);
    CHECK(nlohmann::json::parse(s.out)["steps"] == n0 + 2);

    const auto after = t2j::corpus::load_dataset(tmp / "d.json");
    const auto& e = *t2j::corpus::find_entry(after, "e1");
    REQUIRE(e.errors.size() == n0 + 2);
    CHECK(e.errors[n0].error_message == "NameError: y");
    CHECK(e.errors[n0 + 1].error_code == "line one\nline two");
    CHECK(e.errors[n0 + 1].error_message == "TypeError: bad");
    CHECK(e.errors[n0 + 1].fixed_code == "a = 1\nb = 2");
    CHECK(run_cli("dataset record-fix " + q(tmp / "d.json") +
                  " --id nope --error-code a --error b --fix-info c --fixed-code d")
              .exit_code == 1);
}

TEST_CASE("codebleu subcommand", "[cli]") {
    const auto f = fixture("codebleu/s01_mlp.py");
    const auto r = run_cli("codebleu --format json --candidate " + q(f) + " --reference " + q(f));
    REQUIRE(r.exit_code == 0);
    CHECK_THAT(nlohmann::json::parse(r.out)["combined"].get<double>(),
               Catch::Matchers::WithinAbs(1.0, 1e-9));
    const auto t = run_cli("codebleu --candidate " + q(f) + " --reference " +
                           q(fixture("codebleu/s02_train_step.py")) + " --weights 1,0,0,0");
    REQUIRE(t.exit_code == 0);
    CHECK(t.out.find("combined") != std::string::npos);
    CHECK(run_cli("codebleu --candidate " + q(f) + " --reference " + q(f) + " --weights 1,1,1,1")
              .exit_code == 1);
}

TEST_CASE("translate and judge with the mock provider", "[cli]") {
    TempDir tmp;
    t2j_test::spit(tmp / "src.py", "import torch\nx = torch.ones(3)\n");
    const auto t = run_cli("translate --provider mock --model m --input " + q(tmp / "src.py"));
    REQUIRE(t.exit_code == 0);
    CHECK(t.out.find("jnp.ones") != std::string::npos);

    const auto a = run_cli("translate --provider mock --model m --prompt augmented --dataset " +
                           q(fixture("fixed_bugs_cheap.json")) + " --id e1 --input " +
                           q(tmp / "src.py") + " --format json");
    REQUIRE(a.exit_code == 0);
    CHECK(nlohmann::json::parse(a.out)["prompt"] == "augmented");

    t2j_test::spit(tmp / "cand.py", "import jax.numpy as jnp\nx = jnp.ones(3)\n");
    const auto j = run_cli("judge --provider mock --model j --variant codetrans_func_noref --source " +
                           q(tmp / "src.py") + " --candidate " + q(tmp / "cand.py"));
    REQUIRE(j.exit_code == 0);
    CHECK(j.out.find("T2J_CodeTrans_Func_NoRef: ") == 0);

    // a reference variant without --reference is an argument error
    CHECK(run_cli("judge --provider mock --model j --variant codetrans_func_ref --source " +
                  q(tmp / "src.py") + " --candidate " + q(tmp / "cand.py"))
              .exit_code == 1);
}

TEST_CASE("http provider without a key is a config error", "[cli]") {
    TempDir tmp;
    t2j_test::spit(tmp / "src.py", "import torch\n");
    const auto r = run_cli("translate --provider http --model m --input " + q(tmp / "src.py"));
    // exit 1 when T2J_API_KEY is unset, which is the case in the test environment
    if (!std::getenv("T2J_API_KEY")) CHECK(r.exit_code == 1);
}

TEST_CASE("intrinsic run through the cli", "[cli][experiments]") {
    TempDir out;
    const auto r = run_cli("intrinsic --provider mock --config " + q(fixture("run_intrinsic.json")) +
                           " --output-dir " + q(out.path()));
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("| T2J_FixCost_Score | 163 | 87 |") != std::string::npos);
    for (const char* f : {"report.json", "per_example.csv", "summary.md", "run_log.jsonl"}) {
        CHECK(fs::exists(out / f));
    }

    const auto c = run_cli("corr --format json --report " + q(out / "report.json") + " --dataset " +
                           q(fixture("fixed_bugs_cheap.json")));
    REQUIRE(c.exit_code == 0);
    CHECK(nlohmann::json::parse(c.out).size() == 6);

    CHECK(run_cli("intrinsic --provider mock --config /nonexistent.json").exit_code == 1);
}

TEST_CASE("timing through the cli", "[cli]") {
    TempDir tmp;
    fs::create_directories(tmp / "weak");
    t2j_test::spit(tmp / "runner",
                   "#!/bin/sh\nprintf '{\"exit_code\": 0, \"stdout\": \"\", \"stderr\": \"\", "
                   "\"wall_seconds\": 1.5, \"timed_out\": false}'\n");
    fs::permissions(tmp / "runner", fs::perms::owner_all);
    t2j_test::spit(tmp / "weak" / "e1.py", "print(1)");
    t2j_test::spit(tmp / "weak" / "e2.py", "print(2)");
    const auto r = run_cli("timing --set weak=" + (tmp / "weak").string() + " --runner " +
                           q(tmp / "runner") + " --output-dir " + q(tmp / "t"));
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("| Total | 3.00 |") != std::string::npos);
    CHECK(fs::exists(tmp / "t" / "timing.json"));
    CHECK(run_cli("timing --set weak=" + (tmp / "weak").string() + " --runner /nonexistent")
              .exit_code == 1);
}
