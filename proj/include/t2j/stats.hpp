// Copyright (c) 2026, T2J harness contributors
// SPDX-License-Identifier: Apache-2.0
//
// Correlation between per-example metric vectors. Undefined results are
// std::nullopt; callers render them as NaN.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "t2j/error.hpp"

namespace t2j::stats {

struct MetricVector {
    std::string metric;
    std::vector<std::string> ids;
    std::vector<double> values;
};

inline void validate(const MetricVector& v) {
    if (v.ids.size() != v.values.size()) {
        throw ArgumentError("metric vector " + v.metric + ": " + std::to_string(v.ids.size()) +
                            " ids but " + std::to_string(v.values.size()) + " values");
    }
    std::set<std::string> seen;
    for (const auto& id : v.ids) {
        if (!seen.insert(id).second) {
            throw ArgumentError("metric vector " + v.metric + ": duplicate id \"" + id + "\"");
        }
    }
}

inline double mean(const std::vector<double>& v) {
    if (v.empty()) throw DomainError("mean of an empty vector");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double median(std::vector<double> v) {
    if (v.empty()) throw DomainError("median of an empty vector");
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 ? v[mid] : (v[mid - 1] + v[mid]) / 2.0;
}

/// 1-based ranks; tied values share the mean of the ranks they span.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

inline std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ArgumentError("pearson: length mismatch");
    if (x.size() < 2) throw ArgumentError("pearson: need at least two observations");
    auto constant = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [&](double d) { return d == v.front(); });
    };
    if (constant(x) || constant(y)) return std::nullopt;
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ArgumentError("spearman: length mismatch");
    return pearson(average_ranks(x), average_ranks(y));
}

namespace detail {

/// Values of `a` and `b` paired by id, in `a`'s id order.
inline std::pair<std::vector<double>, std::vector<double>> align(const MetricVector& a,
                                                                 const MetricVector& b) {
    validate(a);
    validate(b);
    std::map<std::string, double> by_id;
    for (std::size_t i = 0; i < b.ids.size(); ++i) by_id[b.ids[i]] = b.values[i];
    if (a.ids.size() != b.ids.size()) {
        throw ArgumentError("metric vectors " + a.metric + " and " + b.metric +
                            " cover different examples");
    }
    std::vector<double> xa, xb;
    for (std::size_t i = 0; i < a.ids.size(); ++i) {
        auto it = by_id.find(a.ids[i]);
        if (it == by_id.end()) {
            throw ArgumentError("example \"" + a.ids[i] + "\" missing from " + b.metric);
        }
        xa.push_back(a.values[i]);
        xb.push_back(it->second);
    }
    return {std::move(xa), std::move(xb)};
}

}  // namespace detail

inline std::optional<double> pearson(const MetricVector& x, const MetricVector& y) {
    auto [a, b] = detail::align(x, y);
    return pearson(a, b);
}

inline std::optional<double> spearman(const MetricVector& x, const MetricVector& y) {
    auto [a, b] = detail::align(x, y);
    return spearman(a, b);
}

}  // namespace t2j::stats
