// Copyright (c) 2026, T2J harness contributors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "t2j/runner_client.hpp"
#include "test_support.hpp"

using namespace t2j;
using namespace t2j::runner;
using t2j_test::TempDir;
namespace fs = std::filesystem;

namespace {

// A stand-in runner: the snippet file holds the JSON it should print, and
// "--timeout" must come second. The timeout value is echoed in stdout when
// the file asks for it with ECHO.
const char* kFakeRunner = R"(#!/bin/sh
if [ "$2" != "--timeout" ]; then echo "bad args" >&2; exit 64; fi
if grep -q ECHO "$1"; then
  printf '{"exit_code": 0, "stdout": "%s", "stderr": "", "wall_seconds": 0.5, "timed_out": false}' "$3"
  exit 0
fi
if grep -q CRASH "$1"; then echo "runner crashed" >&2; exit 3; fi
cat "$1"
)";

fs::path install_runner(const TempDir& tmp) {
    const auto p = tmp / "runner";
    t2j_test::spit(p, kFakeRunner);
    fs::permissions(p, fs::perms::owner_all);
    return p;
}

std::string result_json(int code, double wall, bool timed_out) {
    return "{\"exit_code\": " + std::to_string(code) + ", \"stdout\": \"out\", \"stderr\": \"\", " +
           "\"wall_seconds\": " + std::to_string(wall) +
           ", \"timed_out\": " + (timed_out ? "true" : "false") + "}";
}

}  // namespace

TEST_CASE("parse_run_result accepts the contract", "[runner]") {
    const auto r = parse_run_result(
        R"({"exit_code": 1, "stdout": "a", "stderr": "b", "wall_seconds": 2.25, "timed_out": true, "extra": 1})");
    CHECK(r.exit_code == 1);
    CHECK(r.stdout_text == "a");
    CHECK(r.stderr_text == "b");
    CHECK(r.wall_seconds == 2.25);
    CHECK(r.timed_out);
    CHECK(parse_run_result(R"({"exit_code": 0, "stdout": "", "stderr": "", "wall_seconds": 3, "timed_out": false})")
              .wall_seconds == 3.0);
}

TEST_CASE("parse_run_result is strict", "[runner]") {
    CHECK_THROWS_AS(parse_run_result("not json"), ParseError);
    CHECK_THROWS_AS(parse_run_result("[1]"), ValidationError);
    CHECK_THROWS_AS(parse_run_result(R"({"exit_code": 0, "stdout": "", "stderr": "", "wall_seconds": 1})"),
                    ValidationError);
    CHECK_THROWS_AS(parse_run_result(R"({"exit_code": "0", "stdout": "", "stderr": "", "wall_seconds": 1, "timed_out": false})"),
                    ValidationError);
    CHECK_THROWS_AS(parse_run_result(R"({"exit_code": 0, "stdout": "", "stderr": "", "wall_seconds": -1, "timed_out": false})"),
                    ValidationError);
    CHECK_THROWS_AS(parse_run_result(R"({"exit_code": 0, "stdout": 5, "stderr": "", "wall_seconds": 1, "timed_out": false})"),
                    ValidationError);
}

TEST_CASE("result JSON round trips", "[runner][property]") {
    RunResult r{7, "o\n\"q\"", "e", 1.5, true};
    const auto back = parse_run_result(to_json(r).dump());
    CHECK(back.exit_code == r.exit_code);
    CHECK(back.stdout_text == r.stdout_text);
    CHECK(back.stderr_text == r.stderr_text);
    CHECK(back.wall_seconds == r.wall_seconds);
    CHECK(back.timed_out == r.timed_out);
}

TEST_CASE("resolve_runner", "[runner]") {
    TempDir tmp;
    const auto exe = install_runner(tmp);
    CHECK(resolve_runner(exe) == exe);
    t2j_test::spit(tmp / "plain.txt", "x");
    CHECK_THROWS_AS(resolve_runner(tmp / "plain.txt"), ConfigError);
    CHECK_THROWS_AS(resolve_runner(tmp / "missing"), ConfigError);

    ::setenv("T2J_RUNNER", exe.c_str(), 1);
    CHECK(resolve_runner() == exe);
    ::unsetenv("T2J_RUNNER");

    const std::string saved = std::getenv("PATH") ? std::getenv("PATH") : "";
    ::setenv("PATH", tmp.path().c_str(), 1);
    CHECK(resolve_runner() == exe);
    ::setenv("PATH", "/nonexistent", 1);
    CHECK_THROWS_AS(resolve_runner(), ConfigError);
    ::setenv("PATH", saved.c_str(), 1);
}

TEST_CASE("invoke_runner passes the contract arguments", "[runner]") {
    TempDir tmp;
    const auto exe = install_runner(tmp);
    t2j_test::spit(tmp / "echo.py", "ECHO");
    CHECK(invoke_runner(exe, tmp / "echo.py", 180).stdout_text == "180");
    CHECK(invoke_runner(exe, tmp / "echo.py", 2.5).stdout_text == "2.5");

    t2j_test::spit(tmp / "slow.py", result_json(-9, 180.0, true));
    const auto r = invoke_runner(exe, tmp / "slow.py", 180);
    CHECK(r.timed_out);
    CHECK(r.exit_code == -9);

    CHECK_THROWS_AS(invoke_runner(exe, tmp / "echo.py", 0), ArgumentError);
    t2j_test::spit(tmp / "crash.py", "CRASH");
    CHECK_THROWS_AS(invoke_runner(exe, tmp / "crash.py", 5), IoError);
    t2j_test::spit(tmp / "garbage.py", "{\"exit_code\": 0}");
    CHECK_THROWS_AS(invoke_runner(exe, tmp / "garbage.py", 5), IoError);
}

TEST_CASE("run_timing tabulates per set", "[runner]") {
    TempDir tmp;
    const auto exe = install_runner(tmp);
    t2j_test::spit(tmp / "a1.py", result_json(0, 1.25, false));
    t2j_test::spit(tmp / "a2.py", result_json(1, 2.0, false));
    t2j_test::spit(tmp / "b1.py", result_json(0, 0.5, false));
    t2j_test::spit(tmp / "b3.py", result_json(-9, 10.0, true));
    const std::vector<SnippetSet> sets = {
        {"weak", {{"e1", tmp / "a1.py"}, {"e2", tmp / "a2.py"}}},
        {"strong", {{"e1", tmp / "b1.py"}, {"e3", tmp / "b3.py"}}},
    };
    const auto t = run_timing(exe, sets, 10);
    CHECK(t.example_ids == std::vector<std::string>{"e1", "e2", "e3"});
    CHECK(t.total(0) == 3.25);
    CHECK(t.total(1) == 10.5);
    CHECK_FALSE(t.cells[2][0].has_value());

    const auto md = to_markdown(t);
    CHECK(md.find("| Example | weak | strong |") == 0);
    CHECK(md.find("| e2 | 2.00 (exit 1) | - |") != std::string::npos);
    CHECK(md.find("| e3 | - | 10.00 (timeout) |") != std::string::npos);
    CHECK(md.find("| Total | 3.25 | 10.50 |") != std::string::npos);

    const auto j = to_json(t);
    CHECK(j["totals"]["strong"] == 10.5);
    CHECK(j["rows"][1]["strong"].is_null());
    CHECK_THROWS_AS(run_timing(exe, {}, 10), ArgumentError);
}
