// Copyright (c) 2026, T2J harness contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include <json.hpp>

#include "t2j/codebleu/dataflow.hpp"
#include "t2j/codebleu/lexer.hpp"
#include "t2j/codebleu/ngram.hpp"
#include "t2j/codebleu/syntax.hpp"
#include "t2j/corpus.hpp"
#include "t2j/error.hpp"

namespace t2j::codebleu {

/// Component weights in the order ngram, weighted_ngram, syntax, dataflow.
using Weights = std::array<double, 4>;

struct CodeBleuConfig {
    Weights weights{0.25, 0.25, 0.25, 0.25};
    std::size_t max_n = 4;
    double keyword_weight = 5.0;
    /// Identifiers weighted like keywords, e.g. {"jnp", "vmap"}.
    std::set<std::string> extra_keywords;
};

struct CodeBleuBreakdown {
    double ngram = 0.0;
    double weighted_ngram = 0.0;
    std::optional<double> syntax;    // absent when either side fails to parse
    std::optional<double> dataflow;  // absent when unparseable or no reference entries
    double combined = 0.0;
    Weights weights{0.25, 0.25, 0.25, 0.25};
};

inline nlohmann::ordered_json to_json(const CodeBleuBreakdown& b) {
    nlohmann::ordered_json j;
    j["ngram"] = b.ngram;
    j["weighted_ngram"] = b.weighted_ngram;
    j["syntax"] = b.syntax ? nlohmann::ordered_json(*b.syntax) : nlohmann::ordered_json(nullptr);
    j["dataflow"] =
        b.dataflow ? nlohmann::ordered_json(*b.dataflow) : nlohmann::ordered_json(nullptr);
    j["combined"] = b.combined;
    j["weights"] = b.weights;
    return j;
}

inline void validate_weights(const Weights& w) {
    double sum = 0.0;
    for (double x : w) {
        if (!(x >= 0.0) || !std::isfinite(x)) {
            throw ArgumentError("CodeBLEU weights must be finite and non-negative");
        }
        sum += x;
    }
    if (std::fabs(sum - 1.0) > 1e-9) throw ArgumentError("CodeBLEU weights must sum to 1");
}

/// Scores `candidate` against `reference`.
inline CodeBleuBreakdown codebleu(std::string_view candidate, std::string_view reference,
                                  const CodeBleuConfig& cfg = {}) {
    validate_weights(cfg.weights);
    CodeBleuBreakdown b;
    b.weights = cfg.weights;
    if (candidate.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos) {
        b.syntax = 0.0;
        b.dataflow = 0.0;
        return b;
    }

    const TokenStream cand_tokens = tokenize(candidate);
    const TokenStream ref_tokens = tokenize(reference);
    b.ngram = ngram_match(cand_tokens, ref_tokens, cfg.max_n);
    b.weighted_ngram =
        weighted_ngram_match(cand_tokens, ref_tokens, cfg.keyword_weight, cfg.extra_keywords,
                             cfg.max_n);

    const auto cand_tree = parse_python(candidate);
    const auto ref_tree = parse_python(reference);
    if (cand_tree && ref_tree) {
        b.syntax = syntax_match(*cand_tree.tree, *ref_tree.tree);
        b.dataflow = dataflow_match(*cand_tree.tree, *ref_tree.tree);
    }

    double num = cfg.weights[0] * b.ngram + cfg.weights[1] * b.weighted_ngram;
    double den = cfg.weights[0] + cfg.weights[1];
    if (b.syntax) {
        num += cfg.weights[2] * *b.syntax;
        den += cfg.weights[2];
    }
    if (b.dataflow) {
        num += cfg.weights[3] * *b.dataflow;
        den += cfg.weights[3];
    }
    b.combined = den > 0.0 ? std::clamp(num / den, 0.0, 1.0) : 0.0;
    return b;
}

inline CodeBleuBreakdown codebleu(const corpus::EvalPair& pair, const CodeBleuConfig& cfg = {}) {
    if (!pair.reference_code) {
        throw ArgumentError("codebleu: pair \"" + pair.pair_id + "\" has no reference");
    }
    return codebleu(pair.candidate_code, *pair.reference_code, cfg);
}

}  // namespace t2j::codebleu
