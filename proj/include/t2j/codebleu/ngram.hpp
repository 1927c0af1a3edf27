// Copyright (c) 2026, T2J harness contributors
// SPDX-License-Identifier: Apache-2.0
//
// BLEU-style n-gram match and its keyword-weighted variant.

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "t2j/codebleu/lexer.hpp"
#include "t2j/error.hpp"

namespace t2j::codebleu {

namespace detail {

using Gram = std::vector<std::string>;

inline std::map<Gram, std::size_t> count_grams(const TokenStream& s, std::size_t n) {
    std::map<Gram, std::size_t> out;
    if (s.size() < n) return out;
    for (std::size_t i = 0; i + n <= s.size(); ++i) {
        Gram g;
        g.reserve(n);
        for (std::size_t j = 0; j < n; ++j) g.push_back(s[i + j].text);
        ++out[g];
    }
    return out;
}

/// Shared core. `gram_weight` maps an n-gram to the sum of its token
/// weights; the division by n happens once per order, so the sums stay exact
/// whatever order the grams are visited in. Unit token weights give plain BLEU.
inline double weighted_bleu(const TokenStream& cand, const TokenStream& ref, std::size_t max_n,
                            const std::function<double(const Gram&)>& gram_weight) {
    if (max_n < 1) throw ArgumentError("max_n must be at least 1");
    if (cand.empty()) return 0.0;
    double log_sum = 0.0;
    for (std::size_t n = 1; n <= max_n; ++n) {
        const auto c = count_grams(cand, n);
        const auto r = count_grams(ref, n);
        double matched = 0.0;
        double total = 0.0;
        for (const auto& [g, cnt] : c) {
            const double w = gram_weight(g);
            total += w * static_cast<double>(cnt);
            auto it = r.find(g);
            if (it != r.end()) matched += w * static_cast<double>(std::min(cnt, it->second));
        }
        matched /= static_cast<double>(n);
        total /= static_cast<double>(n);
        double p;
        if (matched > 0.0) {
            p = matched / total;
        } else if (n >= 2) {
            p = 1.0 / (total + 1.0);
        } else {
            return 0.0;
        }
        log_sum += std::log(p);
    }
    const double c_len = static_cast<double>(cand.size());
    const double r_len = static_cast<double>(ref.size());
    const double bp = c_len > r_len ? 1.0 : std::exp(1.0 - r_len / c_len);
    return bp * std::exp(log_sum / static_cast<double>(max_n));
}

}  // namespace detail

/// Modified n-gram precision for n = 1..max_n, geometric mean, brevity
/// penalty. For n >= 2 a zero match count is smoothed to 1 / (total + 1).
inline double ngram_match(const TokenStream& candidate, const TokenStream& reference,
                          std::size_t max_n = 4) {
    return detail::weighted_bleu(candidate, reference, max_n,
                                 [](const detail::Gram& g) { return static_cast<double>(g.size()); });
}

/// Like ngram_match, but each n-gram counts with the mean weight of its
/// tokens: `keyword_weight` for Python keywords and for any text listed in
/// `extra_keywords`, 1 otherwise.
inline double weighted_ngram_match(const TokenStream& candidate, const TokenStream& reference,
                                   double keyword_weight = 5.0,
                                   const std::set<std::string>& extra_keywords = {},
                                   std::size_t max_n = 4) {
    if (!(keyword_weight >= 1.0)) throw ArgumentError("keyword_weight must be >= 1");
    // Token class alone decides for reserved words; the extension list is
    // matched on text because framework names lex as identifiers.
    std::set<std::string> keywords = extra_keywords;
    for (const auto* s : {&candidate, &reference}) {
        for (const auto& t : *s) {
            if (t.cls == TokenClass::Keyword) keywords.insert(t.text);
        }
    }
    return detail::weighted_bleu(candidate, reference, max_n, [&](const detail::Gram& g) {
        double sum = 0.0;
        for (const auto& tok : g) sum += keywords.count(tok) ? keyword_weight : 1.0;
        return sum;
    });
}

}  // namespace t2j::codebleu
