// Copyright (c) 2026, T2J harness contributors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <random>
#include <string>
#include <thread>
#include <vector>

#include "t2j/corpus.hpp"
#include "test_support.hpp"

using namespace t2j;
using namespace t2j::corpus;
using t2j_test::fixture;
using t2j_test::TempDir;

namespace {

FixedBugEntry entry(const std::string& id, std::size_t steps) {
    FixedBugEntry e{id, "x = torch.ones(2)", "x = jnp.ones(2)", "x = jnp.ones(2)", {}, {}, {}};
    for (std::size_t i = 0; i < steps; ++i) {
        e.errors.push_back({"bad" + std::to_string(i), "Error " + std::to_string(i), "fix it",
                            "good" + std::to_string(i)});
    }
    if (steps) e.llm_fix_output = "x = jnp.ones((2,))";
    return e;
}

const char* kTwo = R"([
  {"Example_id": "a", "Input_Code": "p", "LLM_weak_output": "w", "LLM_fix_output": "w", "Errors": []},
  {"Example_id": "b", "Input_Code": "p", "LLM_weak_output": "w", "LLM_fix_output": "f",
   "Errors": [{"Error_Code": "w", "Error": "E", "Fix_info": "i", "Fixed_Code": "f"}],
   "Category": "Other miscellaneous"}
])";

}  // namespace

TEST_CASE("parse_dataset reads well-formed entries", "[corpus]") {
    const auto d = parse_dataset(kTwo);
    REQUIRE(d.size() == 2);
    CHECK(d[0].example_id == "a");
    CHECK(d[1].example_id == "b");
    CHECK(d[1].errors.at(0).error_message == "E");
    CHECK(d[1].category == "Other miscellaneous");
    CHECK_FALSE(d[0].category.has_value());
}

TEST_CASE("duplicate ids are rejected by name", "[corpus]") {
    const std::string text = R"([
      {"Example_id": "e1", "Input_Code": "p", "LLM_weak_output": "w", "LLM_fix_output": "w", "Errors": []},
      {"Example_id": "e1", "Input_Code": "q", "LLM_weak_output": "w", "LLM_fix_output": "w", "Errors": []}])";
    try {
        parse_dataset(text);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("\"e1\""));
    }
}

TEST_CASE("malformed JSON reports a byte offset", "[corpus]") {
    try {
        parse_dataset("[{\"Example_id\": }]");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.byte_offset() > 0);
        CHECK(e.byte_offset() <= 17);
    }
}

TEST_CASE("missing fields name the field and entry", "[corpus]") {
    const std::string text =
        R"([{"Example_id": "e9", "Input_Code": "p", "LLM_weak_output": "w", "Errors": []}])";
    try {
        parse_dataset(text);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("LLM_fix_output"));
        CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("e9"));
    }
    CHECK_THROWS_AS(parse_dataset("{}"), ValidationError);
}

TEST_CASE("validate_entry examples", "[corpus]") {
    CHECK(validate_entry(entry("ok", 0)).empty());
    auto diff = entry("d", 0);
    diff.llm_fix_output = "other";
    CHECK(validate_entry(diff).size() == 1);
    auto bad = entry("s", 3);
    bad.errors[1].fixed_code.clear();
    const auto v = validate_entry(bad);
    REQUIRE(v.size() == 1);
    CHECK_THAT(v[0], Catch::Matchers::ContainsSubstring("Errors[1]"));
}

TEST_CASE("count_fix_steps", "[corpus]") {
    CHECK(count_fix_steps(entry("z", 0)) == 0);
    CHECK(count_fix_steps(entry("big", 32)) == 32);
}

TEST_CASE("cheap-model fixture statistics", "[corpus][fixture]") {
    const auto d = load_dataset(fixture("fixed_bugs_cheap.json"));
    REQUIRE(d.size() == 20);
    const auto s = dataset_stats(d);
    CHECK(s.total == 163);
    CHECK(s.minimum == 1);
    CHECK(s.maximum == 32);
    CHECK(s.median == 5.0);
    CHECK_THAT(s.mean, Catch::Matchers::WithinAbs(8.15, 1e-12));
}

TEST_CASE("costly-model fixture statistics", "[corpus][fixture]") {
    const auto d = load_dataset(fixture("fixed_bugs_costly.json"));
    REQUIRE(d.size() == 22);
    const auto s = dataset_stats(d);
    CHECK(s.total == 61);
    CHECK(s.minimum == 0);
    CHECK(s.maximum == 12);
    CHECK_THAT(s.mean, Catch::Matchers::WithinAbs(2.77, 0.005));
}

TEST_CASE("augmented-output fixture totals 87", "[corpus][fixture]") {
    CHECK(dataset_stats(load_dataset(fixture("t2j_fixed_bugs.json"))).total == 87);
}

TEST_CASE("dataset_stats edge cases", "[corpus]") {
    CHECK_THROWS_AS(dataset_stats({}), DomainError);
    const auto s = dataset_stats({entry("one", 3)});
    CHECK(s.minimum == 3);
    CHECK(s.maximum == 3);
    CHECK(s.mean == 3.0);
    CHECK(s.median == 3.0);
    CHECK(s.total == 3);
    CHECK(dataset_stats({entry("a", 1), entry("b", 4)}).median == 2.5);
}

TEST_CASE("stats invariants over random datasets", "[corpus][property]") {
    std::mt19937 rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        Dataset d;
        const int n = 1 + static_cast<int>(rng() % 12);
        std::size_t sum = 0;
        for (int i = 0; i < n; ++i) {
            const std::size_t k = rng() % 7;
            sum += k;
            d.push_back(entry("id" + std::to_string(i), k));
        }
        const auto s = dataset_stats(d);
        CHECK(s.total == sum);
        CHECK(s.mean == static_cast<double>(sum) / n);
        CHECK(static_cast<double>(s.minimum) <= s.median);
        CHECK(s.median <= static_cast<double>(s.maximum));
        // round trip
        CHECK(parse_dataset(serialize_dataset(d)) == d);
    }
}

TEST_CASE("leave_one_out_context drops exactly the target", "[corpus]") {
    const auto d = load_dataset(fixture("fixed_bugs_cheap.json"));
    for (const auto& e : d) {
        const auto ctx = leave_one_out_context(d, e.example_id);
        CHECK(ctx.find("\"Example_id\": \"" + e.example_id + "\"") == std::string::npos);
        const auto back = parse_dataset(ctx);
        CHECK(back.size() == d.size() - 1);
        CHECK(ctx == leave_one_out_context(d, e.example_id));
    }
    CHECK(leave_one_out_context({entry("solo", 1)}, "solo") == "[]");
    CHECK_THROWS_AS(leave_one_out_context(d, "nope"), NotFoundError);
}

TEST_CASE("context preserves file order", "[corpus]") {
    const auto d = parse_dataset(kTwo);
    const auto ctx = full_context(d);
    CHECK(ctx.find("\"a\"") < ctx.find("\"b\""));
    CHECK(ctx.find("Example_id") < ctx.find("Input_Code"));
}

TEST_CASE("append_fix_step appends and keeps other bytes", "[corpus]") {
    TempDir tmp;
    const auto path = tmp / "ds.json";
    t2j_test::spit(path, kTwo);
    const FixStep step{"w2", "TypeError: boom", "rewrote it", "f2"};
    const auto updated = append_fix_step(path, "b", step);
    CHECK(updated.errors.size() == 2);
    CHECK(updated.errors.back() == step);

    const auto reloaded = load_dataset(path);
    CHECK(reloaded[1].errors.size() == 2);
    CHECK(reloaded[1].errors[1] == step);
    CHECK(reloaded[0] == parse_dataset(kTwo)[0]);
    // the untouched entry is byte-identical in the file
    const std::string before = kTwo;
    const std::string after = t2j_test::slurp(path);
    const std::string first_line = before.substr(0, before.find("\n  {\"Example_id\": \"b\""));
    CHECK(after.rfind(first_line, 0) == 0);

    CHECK_THROWS_AS(append_fix_step(path, "zz", step), NotFoundError);
    CHECK_THROWS_AS(append_fix_step(path, "b", FixStep{"", "e", "i", "x"}), ValidationError);
}

TEST_CASE("append_fix_step serializes concurrent writers", "[corpus]") {
    TempDir tmp;
    const auto path = tmp / "ds.json";
    save_dataset(path, {entry("a", 1), entry("b", 1)});
    std::vector<std::thread> ts;
    for (int i = 0; i < 4; ++i) {
        ts.emplace_back([&, i] {
            append_fix_step(path, i % 2 ? "a" : "b",
                            FixStep{"c" + std::to_string(i), "e", "i", "f"});
        });
    }
    for (auto& t : ts) t.join();
    const auto d = load_dataset(path);
    CHECK(d[0].errors.size() == 3);
    CHECK(d[1].errors.size() == 3);
}

TEST_CASE("parallel corpus loading", "[corpus]") {
    const auto items = load_parallel_corpus(fixture("ground_truth.json"));
    CHECK(items.size() == 20);
    CHECK(items[0].reference.has_value());
    const auto gh = load_parallel_corpus(fixture("github_corpus.json"));
    CHECK_FALSE(gh.empty());
    CHECK_FALSE(gh[0].reference.has_value());
    CHECK_THROWS_AS(parse_parallel_corpus(R"([{"id": "x"}])"), ValidationError);
    CHECK_THROWS_AS(parse_parallel_corpus(R"([{"id": "x", "source": "a"}, {"id": "x", "source": "b"}])"),
                    ValidationError);
}

TEST_CASE("fixture entries honour the schema invariants", "[corpus][fixture]") {
    for (const char* f : {"fixed_bugs_cheap.json", "fixed_bugs_costly.json", "t2j_fixed_bugs.json"}) {
        for (const auto& e : load_dataset(fixture(f))) {
            CHECK(validate_entry(e).empty());
            for (const auto& s : e.errors) {
                CHECK(e.llm_weak_output.find(s.error_code) != std::string::npos);
            }
        }
    }
}
