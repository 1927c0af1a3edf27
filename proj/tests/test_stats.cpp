// Copyright (c) 2026, T2J harness contributors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "t2j/stats.hpp"

using namespace t2j;
using namespace t2j::stats;
using Catch::Matchers::WithinAbs;

TEST_CASE("pearson and spearman match closed forms", "[stats][oracle]") {
    for (const auto& c : t2j_test::corr_cases()) {
        const auto p = pearson(c.x, c.y);
        const auto s = spearman(c.x, c.y);
        REQUIRE(p.has_value());
        REQUIRE(s.has_value());
        CHECK_THAT(*p, WithinAbs(c.pearson, 1e-12));
        CHECK_THAT(*s, WithinAbs(c.spearman, 1e-12));
    }
}

TEST_CASE("constant input is undefined", "[stats]") {
    CHECK_FALSE(pearson({1, 1, 1}, {1, 2, 3}).has_value());
    CHECK_FALSE(pearson({1, 2, 3}, {4, 4, 4}).has_value());
    CHECK_FALSE(spearman({2, 2, 2, 2}, {1, 2, 3, 4}).has_value());
}

TEST_CASE("correlation argument checks", "[stats]") {
    CHECK_THROWS_AS(pearson({1, 2}, {1, 2, 3}), ArgumentError);
    CHECK_THROWS_AS(pearson({1}, {1}), ArgumentError);
    CHECK_THROWS_AS(spearman({1, 2}, {1}), ArgumentError);
}

TEST_CASE("average ranks share ties", "[stats]") {
    CHECK(average_ranks({10, 20, 20, 5}) == std::vector<double>{2, 3.5, 3.5, 1});
    CHECK(average_ranks({}).empty());
    CHECK(median({3, 1, 2}) == 2);
    CHECK(median({4, 1, 2, 3}) == 2.5);
    CHECK_THROWS_AS(mean({}), DomainError);
}

TEST_CASE("correlation invariants on random vectors", "[stats][property]") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 3 + rng() % 20;
        std::vector<double> x(n), y(n);
        for (auto& v : x) v = u(rng);
        for (auto& v : y) v = std::round(u(rng));  // integer values produce ties
        const auto pxy = pearson(x, y);
        const auto sxy = spearman(x, y);
        if (!pxy) continue;
        CHECK(*pxy >= -1.0);
        CHECK(*pxy <= 1.0);
        CHECK(*sxy >= -1.0);
        CHECK(*sxy <= 1.0);
        CHECK_THAT(*pearson(y, x), WithinAbs(*pxy, 1e-12));
        CHECK_THAT(*spearman(y, x), WithinAbs(*sxy, 1e-12));
        CHECK_THAT(*pearson(x, x), WithinAbs(1.0, 1e-12));

        // positive affine maps leave both unchanged; negation flips the sign
        std::vector<double> ax(n), nx(n);
        for (std::size_t i = 0; i < n; ++i) {
            ax[i] = 3.0 * x[i] + 7.0;
            nx[i] = -x[i];
        }
        CHECK_THAT(*pearson(ax, y), WithinAbs(*pxy, 1e-9));
        CHECK_THAT(*spearman(ax, y), WithinAbs(*sxy, 1e-12));
        CHECK_THAT(*pearson(nx, y), WithinAbs(-*pxy, 1e-12));
        CHECK_THAT(*spearman(nx, y), WithinAbs(-*sxy, 1e-12));
    }
}

TEST_CASE("spearman is invariant under monotone transforms", "[stats][property]") {
    const std::vector<double> x = {0.3, 1.7, 2.2, 5.0, 9.1, 0.9};
    const std::vector<double> y = {4, 2, 8, 1, 7, 3};
    std::vector<double> ex;
    for (double v : x) ex.push_back(std::exp(v));
    CHECK(*spearman(ex, y) == *spearman(x, y));
}

TEST_CASE("metric vectors align by id", "[stats]") {
    const MetricVector a{"a", {"p", "q", "r", "s"}, {1, 2, 3, 4}};
    const MetricVector b{"b", {"s", "r", "q", "p"}, {3, 4, 1, 2}};
    // aligned b = (2, 1, 4, 3)
    CHECK_THAT(*pearson(a, b), WithinAbs(0.6, 1e-12));
    CHECK_THAT(*spearman(a, b), WithinAbs(0.6, 1e-12));

    CHECK_THROWS_AS(pearson(a, MetricVector{"c", {"p", "q", "r"}, {1, 2, 3}}), ArgumentError);
    CHECK_THROWS_AS(pearson(a, MetricVector{"c", {"p", "q", "r", "x"}, {1, 2, 3, 4}}),
                    ArgumentError);
    CHECK_THROWS_AS(pearson(a, MetricVector{"c", {"p", "p", "r", "s"}, {1, 2, 3, 4}}),
                    ArgumentError);
    CHECK_THROWS_AS(validate(MetricVector{"c", {"p"}, {1, 2}}), ArgumentError);
}
