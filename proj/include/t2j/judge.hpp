// Copyright (c) 2026, T2J harness contributors
// SPDX-License-Identifier: Apache-2.0
//
// LLM-judge metrics: rubric scoring (four CodeTrans variants), pairwise
// comparison between two candidate sets, and human fixing cost.

#pragma once

#include <cctype>
#include <cstdint>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "t2j/corpus.hpp"
#include "t2j/error.hpp"
#include "t2j/llm_client.hpp"
#include "t2j/prompt.hpp"

namespace t2j::judge {

enum class Choice { A, B, Tie };

inline std::string_view to_string(Choice c) {
    switch (c) {
        case Choice::A: return "A";
        case Choice::B: return "B";
        case Choice::Tie: return "tie";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Response parsing

namespace detail {

inline bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

/// Length of a range separator ("-", "–", "—", " to ") starting at `p`,
/// allowing surrounding blanks, or 0.
inline std::size_t range_separator(std::string_view s, std::size_t p) {
    std::size_t q = p;
    while (q < s.size() && s[q] == ' ') ++q;
    std::size_t sep = 0;
    if (q < s.size() && s[q] == '-') {
        sep = 1;
    } else if (s.compare(q, 3, "\xE2\x80\x93") == 0 || s.compare(q, 3, "\xE2\x80\x94") == 0) {
        sep = 3;
    } else if (s.compare(q, 2, "to") == 0 && q + 2 < s.size() && s[q + 2] == ' ') {
        sep = 2;
    }
    if (sep == 0) return 0;
    q += sep;
    while (q < s.size() && s[q] == ' ') ++q;
    if (q < s.size() && std::isdigit(static_cast<unsigned char>(s[q]))) return q - p;
    return 0;
}

}  // namespace detail

/// First standalone integer of the response if it lies in [0,4]. Range
/// notations such as "(0-4)" and denominators ("/4") are skipped; a signed
/// or out-of-range first integer makes the response unparseable.
inline std::optional<int> parse_rubric_score(std::string_view r) {
    std::size_t i = 0;
    while (i < r.size()) {
        if (!std::isdigit(static_cast<unsigned char>(r[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < r.size() && std::isdigit(static_cast<unsigned char>(r[j]))) ++j;
        const bool glued_before = i > 0 && (detail::is_word_char(r[i - 1]) || r[i - 1] == '.');
        const bool decimal =
            j + 1 < r.size() && r[j] == '.' && std::isdigit(static_cast<unsigned char>(r[j + 1]));
        const bool glued_after = j < r.size() && detail::is_word_char(r[j]);
        if (glued_before || decimal || glued_after) {
            i = j;
            while (i < r.size() && (std::isdigit(static_cast<unsigned char>(r[i])) || r[i] == '.')) {
                ++i;
            }
            continue;
        }
        if (i > 0 && r[i - 1] == '/') {
            i = j;
            continue;
        }
        if (const std::size_t sep = detail::range_separator(r, j); sep > 0) {
            i = j + sep;
            while (i < r.size() && std::isdigit(static_cast<unsigned char>(r[i]))) ++i;
            continue;
        }
        if (i > 0 && (r[i - 1] == '-' || r[i - 1] == '+')) return std::nullopt;
        if (j - i > 1) return std::nullopt;
        const int v = r[i] - '0';
        if (v > 4) return std::nullopt;
        return v;
    }
    return std::nullopt;
}

namespace detail {

inline std::optional<Choice> explicit_verdict(const std::string& text) {
    static const std::regex patterns[] = {
        std::regex(R"((?:candidate\s*)?\(?\b([ab])\b\)?\s+(?:is|seems|appears)\s+(?:to\s+be\s+)?(?:the\s+)?(?:clearly\s+|slightly\s+|much\s+)?(?:better|superior|preferred|preferable|more\s+accurate|more\s+correct|stronger))",
                   std::regex::icase),
        std::regex(R"((?:answer|verdict|choice|winner|better\s+candidate|preferred\s+candidate|better\s+translation|final\s+answer)\s*[:=\-]\s*\**\s*(?:candidate\s*)?\(?\b([ab])\b)",
                   std::regex::icase),
        std::regex(R"(\b(?:i\s+)?(?:prefer|choose|select|pick)\s+(?:candidate\s*)?\(?\b([ab])\b)",
                   std::regex::icase),
    };
    std::set<char> seen;
    for (const auto& re : patterns) {
        for (std::sregex_iterator it(text.begin(), text.end(), re), end; it != end; ++it) {
            const std::string m = (*it)[1].str();
            // A lone lowercase "a" is normally the article.
            if (m == "a" && &re != &patterns[1]) continue;
            seen.insert(static_cast<char>(std::toupper(static_cast<unsigned char>(m[0]))));
        }
    }
    if (seen.size() != 1) return std::nullopt;
    return *seen.begin() == 'A' ? Choice::A : Choice::B;
}

inline bool mentions_tie(const std::string& text) {
    static const std::regex tie(
        R"(\b(?:it'?s\s+a\s+tie|tie|tied|equally\s+(?:good|bad|correct|valid|accurate)|both\s+(?:candidates\s+)?(?:are\s+)?(?:equally|equivalent|identical)|neither\s+(?:candidate\s+)?is\s+better|no\s+(?:clear\s+)?winner)\b)",
        std::regex::icase);
    return std::regex_search(text, tie);
}

/// Distinct standalone "A"/"B" mentions (uppercase, or "Candidate a/b").
inline std::set<char> slot_mentions(std::string_view line) {
    std::set<char> out;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (c != 'A' && c != 'B') continue;
        const bool left_ok = i == 0 || !is_word_char(line[i - 1]);
        const bool right_ok = i + 1 >= line.size() || !is_word_char(line[i + 1]);
        // "A" followed by a lowercase word is usually the article.
        const bool article = c == 'A' && i + 2 < line.size() && line[i + 1] == ' ' &&
                             std::islower(static_cast<unsigned char>(line[i + 2])) &&
                             !(i >= 10 && line.substr(i - 10, 10) == "Candidate ");
        if (left_ok && right_ok && !article) out.insert(c);
    }
    return out;
}

inline std::string_view final_sentence_line(std::string_view r) {
    std::string_view last;
    std::size_t pos = 0;
    while (pos <= r.size()) {
        std::size_t nl = r.find('\n', pos);
        if (nl == std::string_view::npos) nl = r.size();
        std::string_view line = r.substr(pos, nl - pos);
        for (char ch : line) {
            if (std::isalpha(static_cast<unsigned char>(ch))) {
                last = line;
                break;
            }
        }
        pos = nl + 1;
    }
    return last;
}

}  // namespace detail

/// Verdict of a comparison answer, or nullopt when unparseable.
///
/// Order of evaluation: explicit verdict phrases ("Candidate A is better",
/// "Answer: B", "I prefer B") when they all agree; then tie wording; then the
/// single distinct A/B mention on the final line that contains letters.
inline std::optional<Choice> parse_comparison_verdict(std::string_view response) {
    const std::string text(response);
    if (auto v = detail::explicit_verdict(text)) return v;
    if (detail::mentions_tie(text)) return Choice::Tie;
    const auto mentions = detail::slot_mentions(detail::final_sentence_line(response));
    if (mentions.size() != 1) return std::nullopt;
    return *mentions.begin() == 'A' ? Choice::A : Choice::B;
}

// ---------------------------------------------------------------------------
// Records

struct JudgeVerdict {
    std::string target;  // pair_id
    prompt::PromptKind variant = prompt::PromptKind::CodeTransFuncNoRef;
    std::optional<int> score;       // rubric variants
    std::optional<Choice> choice;   // comparison
    bool unparseable = false;
    std::string raw_response;       // always retained
    std::optional<std::uint64_t> order_seed;  // comparison only
    bool swapped = false;           // comparison: set two was shown as A
    std::string error;              // transport/provider failure, if any
    int queries = 0;
};

inline nlohmann::ordered_json to_json(const JudgeVerdict& v) {
    nlohmann::ordered_json j;
    j["type"] = "verdict";
    j["target"] = v.target;
    j["variant"] = prompt::to_string(v.variant);
    if (v.score) j["score"] = *v.score;
    if (v.choice) j["choice"] = to_string(*v.choice);
    j["unparseable"] = v.unparseable;
    if (v.order_seed) {
        j["order_seed"] = *v.order_seed;
        j["swapped"] = v.swapped;
    }
    if (!v.error.empty()) j["error"] = v.error;
    j["queries"] = v.queries;
    j["raw_response"] = v.raw_response;
    return j;
}

struct ScoreRecord {
    std::string metric;
    std::string variant;
    std::optional<double> aggregate;  // mean over parsed items
    std::vector<std::string> item_ids;
    std::vector<std::optional<double>> per_item;
    std::size_t n = 0;
    std::size_t failures = 0;
};

inline nlohmann::ordered_json to_json(const ScoreRecord& s) {
    nlohmann::ordered_json j;
    j["type"] = "score";
    j["metric"] = s.metric;
    j["variant"] = s.variant;
    j["aggregate"] = s.aggregate ? nlohmann::ordered_json(*s.aggregate) : nullptr;
    j["n"] = s.n;
    j["failures"] = s.failures;
    auto& items = j["items"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < s.item_ids.size(); ++i) {
        items.push_back({{"id", s.item_ids[i]},
                         {"value", s.per_item[i] ? nlohmann::ordered_json(*s.per_item[i])
                                                 : nlohmann::ordered_json(nullptr)}});
    }
    return j;
}

namespace detail {

inline void finish_record(ScoreRecord& rec) {
    double sum = 0.0;
    std::size_t parsed = 0;
    for (const auto& v : rec.per_item) {
        if (v) {
            sum += *v;
            ++parsed;
        }
    }
    rec.n = rec.per_item.size();
    rec.failures = rec.n - parsed;
    if (parsed > 0) rec.aggregate = sum / static_cast<double>(parsed);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Rubric scoring

struct CodeTransResult {
    ScoreRecord record;
    std::vector<JudgeVerdict> verdicts;
};

/// Judges every pair with the given rubric variant. Unparseable answers are
/// re-queried once; items still unparseable (or failing in transport) are
/// excluded from the mean and counted as failures.
inline CodeTransResult codetrans_score(llm::LlmClient& client, const prompt::TemplateSet& templates,
                                       const std::vector<corpus::EvalPair>& pairs,
                                       prompt::PromptKind variant,
                                       llm::Role judge = llm::Role::Costly) {
    if (!prompt::is_judge_kind(variant)) {
        throw ArgumentError("codetrans_score: " + std::string(prompt::to_string(variant)) +
                            " is not a rubric variant");
    }
    if (pairs.empty()) throw ArgumentError("codetrans_score: no pairs");
    // Render everything up front so missing references fail before any query.
    std::vector<prompt::RenderedPrompt> prompts;
    prompts.reserve(pairs.size());
    for (const auto& p : pairs) prompts.push_back(prompt::render_judge(templates, variant, p));

    CodeTransResult out;
    out.verdicts.resize(pairs.size());
    client.log().ordered_for(pairs.size(), client.max_in_flight(), [&](std::size_t i) {
        JudgeVerdict& v = out.verdicts[i];
        v.target = pairs[i].pair_id;
        v.variant = variant;
        try {
            for (int q = 0; q < 2 && !v.score; ++q) {
                v.raw_response = client.complete(prompts[i], judge).response;
                ++v.queries;
                v.score = parse_rubric_score(v.raw_response);
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            v.error = e.what();
        }
        v.unparseable = !v.score;
    });

    auto& rec = out.record;
    rec.metric = prompt::metric_name(variant);
    rec.variant = std::string(prompt::to_string(variant));
    for (const auto& v : out.verdicts) {
        rec.item_ids.push_back(v.target);
        rec.per_item.push_back(v.score ? std::optional<double>(*v.score) : std::nullopt);
    }
    detail::finish_record(rec);
    for (const auto& v : out.verdicts) client.log().append(to_json(v));
    client.log().append(to_json(rec));
    if (!rec.aggregate) {
        throw MetricError(rec.metric + ": every one of " + std::to_string(rec.n) +
                          " judge answers was unparseable or failed");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pairwise comparison

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Per-item coin flip. True means set two's candidate is shown in slot A.
inline bool slot_swapped(std::uint64_t seed, std::size_t item) {
    return (splitmix64(seed + static_cast<std::uint64_t>(item) * 0x9E3779B97F4A7C15ULL) & 1U) != 0;
}

struct ComparisonResult {
    double score = 0.0;
    ScoreRecord record;
    std::vector<JudgeVerdict> verdicts;
};

/// Fraction of items on which the judge prefers set one. Ties, unparseable
/// answers and failed queries count as 0.
inline ComparisonResult comparison_score(llm::LlmClient& client,
                                         const prompt::TemplateSet& templates,
                                         const std::vector<std::string>& set_one,
                                         const std::vector<std::string>& set_two,
                                         const std::vector<std::string>& sources,
                                         std::uint64_t seed,
                                         llm::Role judge = llm::Role::Costly,
                                         const std::vector<std::string>& ids = {}) {
    const std::size_t n = sources.size();
    if (n == 0) throw ArgumentError("comparison_score: no items");
    if (set_one.size() != n || set_two.size() != n) {
        throw ArgumentError("comparison_score: set sizes differ (" +
                            std::to_string(set_one.size()) + ", " +
                            std::to_string(set_two.size()) + ", " + std::to_string(n) + ")");
    }
    if (!ids.empty() && ids.size() != n) throw ArgumentError("comparison_score: id count differs");

    std::vector<prompt::RenderedPrompt> prompts;
    std::vector<bool> swapped(n);
    for (std::size_t i = 0; i < n; ++i) {
        swapped[i] = slot_swapped(seed, i);
        const auto& a = swapped[i] ? set_two[i] : set_one[i];
        const auto& b = swapped[i] ? set_one[i] : set_two[i];
        prompts.push_back(prompt::render_comparison(templates, sources[i], a, b));
    }

    ComparisonResult out;
    out.verdicts.resize(n);
    client.log().ordered_for(n, client.max_in_flight(), [&](std::size_t i) {
        JudgeVerdict& v = out.verdicts[i];
        v.target = ids.empty() ? std::to_string(i) : ids[i];
        v.variant = prompt::PromptKind::Comparison;
        v.order_seed = seed;
        v.swapped = swapped[i];
        try {
            v.raw_response = client.complete(prompts[i], judge).response;
            v.queries = 1;
            v.choice = parse_comparison_verdict(v.raw_response);
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            v.error = e.what();
        }
        v.unparseable = !v.choice;
    });

    auto& rec = out.record;
    rec.metric = prompt::metric_name(prompt::PromptKind::Comparison);
    rec.variant = "comparison";
    std::size_t wins = 0;
    for (const auto& v : out.verdicts) {
        bool better = false;
        if (v.choice && *v.choice != Choice::Tie) {
            const bool chose_a = *v.choice == Choice::A;
            better = chose_a != v.swapped;
        }
        wins += better ? 1 : 0;
        rec.item_ids.push_back(v.target);
        rec.per_item.push_back(better ? 1.0 : 0.0);
    }
    rec.n = n;
    rec.failures = static_cast<std::size_t>(
        std::count_if(out.verdicts.begin(), out.verdicts.end(),
                      [](const JudgeVerdict& v) { return v.unparseable; }));
    out.score = static_cast<double>(wins) / static_cast<double>(n);
    rec.aggregate = out.score;
    for (const auto& v : out.verdicts) client.log().append(to_json(v));
    client.log().append(to_json(rec));
    return out;
}

// ---------------------------------------------------------------------------
// Fixing cost

struct FixCost {
    double mean = 0.0;
    std::size_t total = 0;
    std::size_t n = 0;
};

inline FixCost fixcost_score(const corpus::Dataset& dataset) {
    if (dataset.empty()) throw DomainError("fixcost_score: dataset is empty");
    FixCost f;
    f.n = dataset.size();
    for (const auto& e : dataset) f.total += corpus::count_fix_steps(e);
    f.mean = static_cast<double>(f.total) / static_cast<double>(f.n);
    return f;
}

}  // namespace t2j::judge
