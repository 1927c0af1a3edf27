// Copyright (c) 2026, T2J harness contributors
// SPDX-License-Identifier: Apache-2.0
//
// Prompt rendering from golden template files.
//
// Each PromptKind has one UTF-8 template file. Placeholders are spelled
// {CODE}, {SOURCE_CODE}, {TRANSLATED_CODE}, {REFERENCE}, {TRANSLATE_CODE_A}
// and {TRANSLATE_CODE_B}. Substitution is a single left-to-right pass over
// the template, so placeholder-like text inside user code is never expanded.

#pragma once

#include <algorithm>
#include <array>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "t2j/corpus.hpp"
#include "t2j/digest.hpp"
#include "t2j/error.hpp"
#include "t2j/io.hpp"

#ifndef T2J_TEMPLATE_DIR
#define T2J_TEMPLATE_DIR "templates"
#endif

namespace t2j::prompt {

namespace fs = std::filesystem;

enum class PromptKind {
    Standard,
    Augmented,
    CodeTransFuncNoRef,
    CodeTransFuncRef,
    CodeTransUseNoRef,
    CodeTransUseRef,
    Comparison,
};

inline constexpr std::array<PromptKind, 7> kAllKinds = {
    PromptKind::Standard,          PromptKind::Augmented,        PromptKind::CodeTransFuncNoRef,
    PromptKind::CodeTransFuncRef,  PromptKind::CodeTransUseNoRef, PromptKind::CodeTransUseRef,
    PromptKind::Comparison,
};

inline constexpr std::array<PromptKind, 4> kJudgeKinds = {
    PromptKind::CodeTransUseRef, PromptKind::CodeTransFuncRef, PromptKind::CodeTransUseNoRef,
    PromptKind::CodeTransFuncNoRef,
};

inline std::string_view to_string(PromptKind k) {
    switch (k) {
        case PromptKind::Standard: return "standard";
        case PromptKind::Augmented: return "augmented";
        case PromptKind::CodeTransFuncNoRef: return "codetrans_func_noref";
        case PromptKind::CodeTransFuncRef: return "codetrans_func_ref";
        case PromptKind::CodeTransUseNoRef: return "codetrans_use_noref";
        case PromptKind::CodeTransUseRef: return "codetrans_use_ref";
        case PromptKind::Comparison: return "comparison";
    }
    return "unknown";
}

inline std::optional<PromptKind> kind_from_string(std::string_view s) {
    for (auto k : kAllKinds) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

/// Metric name used in reports, e.g. "T2J_CodeTrans_Func_NoRef".
inline std::string metric_name(PromptKind k) {
    switch (k) {
        case PromptKind::CodeTransFuncNoRef: return "T2J_CodeTrans_Func_NoRef";
        case PromptKind::CodeTransFuncRef: return "T2J_CodeTrans_Func_Ref";
        case PromptKind::CodeTransUseNoRef: return "T2J_CodeTrans_Use_NoRef";
        case PromptKind::CodeTransUseRef: return "T2J_CodeTrans_Use_Ref";
        case PromptKind::Comparison: return "T2J_Comparison_Score";
        default: return std::string(to_string(k));
    }
}

inline bool is_judge_kind(PromptKind k) {
    return k == PromptKind::CodeTransFuncNoRef || k == PromptKind::CodeTransFuncRef ||
           k == PromptKind::CodeTransUseNoRef || k == PromptKind::CodeTransUseRef;
}

inline bool needs_reference(PromptKind k) {
    return k == PromptKind::CodeTransFuncRef || k == PromptKind::CodeTransUseRef;
}

inline std::string template_file_name(PromptKind k) { return std::string(to_string(k)) + ".txt"; }

inline const std::vector<std::string>& known_placeholders() {
    static const std::vector<std::string> names = {
        "CODE", "SOURCE_CODE", "TRANSLATED_CODE", "REFERENCE", "TRANSLATE_CODE_A",
        "TRANSLATE_CODE_B",
    };
    return names;
}

inline std::set<std::string> expected_placeholders(PromptKind k) {
    switch (k) {
        case PromptKind::Standard:
        case PromptKind::Augmented: return {"CODE"};
        case PromptKind::CodeTransFuncNoRef:
        case PromptKind::CodeTransUseNoRef: return {"SOURCE_CODE", "TRANSLATED_CODE"};
        case PromptKind::CodeTransFuncRef:
        case PromptKind::CodeTransUseRef: return {"SOURCE_CODE", "TRANSLATED_CODE", "REFERENCE"};
        case PromptKind::Comparison: return {"CODE", "TRANSLATE_CODE_A", "TRANSLATE_CODE_B"};
    }
    return {};
}

struct RenderedPrompt {
    PromptKind kind;
    std::string text;
    std::string inputs_digest;  // sha256 over the kind and substituted values
};

using Bindings = std::vector<std::pair<std::string, std::string>>;

namespace detail {

/// Placeholder name starting at `pos` (which must hold '{'), if any.
inline std::optional<std::string> placeholder_at(std::string_view text, std::size_t pos) {
    for (const auto& name : known_placeholders()) {
        if (text.size() - pos >= name.size() + 2 && text[pos + 1 + name.size()] == '}' &&
            text.compare(pos + 1, name.size(), name) == 0) {
            return name;
        }
    }
    return std::nullopt;
}

inline std::set<std::string> placeholders_in(std::string_view text) {
    std::set<std::string> out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '{') continue;
        if (auto p = placeholder_at(text, i)) out.insert(*p);
    }
    return out;
}

}  // namespace detail

/// Single-pass substitution. Every placeholder occurring in `tmpl` must be bound.
inline std::string substitute(std::string_view tmpl, const Bindings& bindings) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            if (auto name = detail::placeholder_at(tmpl, i)) {
                auto it = std::find_if(bindings.begin(), bindings.end(),
                                       [&](const auto& b) { return b.first == *name; });
                if (it == bindings.end()) {
                    throw ArgumentError("unbound placeholder {" + *name + "}");
                }
                out += it->second;
                i += name->size() + 2;
                continue;
            }
        }
        out.push_back(tmpl[i]);
        ++i;
    }
    return out;
}

/// Template directory: $T2J_TEMPLATE_DIR if set, else the build-time default.
inline fs::path default_template_dir() {
    if (const char* env = std::getenv("T2J_TEMPLATE_DIR"); env && *env) return env;
    return T2J_TEMPLATE_DIR;
}

/// The seven templates, read once and immutable afterwards.
class TemplateSet {
public:
    static TemplateSet load(const fs::path& dir = default_template_dir()) {
        TemplateSet set;
        for (auto k : kAllKinds) {
            const fs::path file = dir / template_file_name(k);
            if (!fs::exists(file)) {
                throw ConfigError("missing prompt template " + file.string());
            }
            set.put(k, io::read_file(file));
        }
        return set;
    }

    /// Builds a set from in-memory text (tests, embedding).
    static TemplateSet from_texts(const std::map<PromptKind, std::string>& texts) {
        TemplateSet set;
        for (auto k : kAllKinds) {
            auto it = texts.find(k);
            if (it == texts.end()) {
                throw ConfigError("missing template for " + std::string(to_string(k)));
            }
            set.put(k, it->second);
        }
        return set;
    }

    const std::string& text(PromptKind k) const { return texts_.at(k); }

private:
    void put(PromptKind k, std::string text) {
        const auto found = detail::placeholders_in(text);
        const auto expected = expected_placeholders(k);
        if (found != expected) {
            throw ConfigError("template " + template_file_name(k) +
                              " does not carry the expected placeholders");
        }
        texts_[k] = std::move(text);
    }

    std::map<PromptKind, std::string> texts_;
};

namespace detail {

inline RenderedPrompt render(const TemplateSet& templates, PromptKind kind,
                             const Bindings& bindings, std::string_view extra = {}) {
    Sha256 h;
    h.update_field(to_string(kind));
    for (const auto& [name, value] : bindings) {
        h.update_field(name);
        h.update_field(value);
    }
    h.update_field(extra);
    return RenderedPrompt{kind, substitute(templates.text(kind), bindings) + std::string(extra),
                          h.hex()};
}

inline void require_non_empty(std::string_view value, std::string_view what) {
    if (value.empty()) throw ArgumentError(std::string(what) + " must not be empty");
}

}  // namespace detail

inline RenderedPrompt render_standard(const TemplateSet& templates, std::string_view code) {
    detail::require_non_empty(code, "source code");
    return detail::render(templates, PromptKind::Standard, {{"CODE", std::string(code)}});
}

/// Header line introducing the inlined dataset, which stands in for the
/// uploaded JSON file the template prose refers to.
inline constexpr std::string_view kContextHeader =
    "JSON file (dataset of common errors in PyTorch-to-JAX translation):";

/// Augmented prompt: the template with {CODE} substituted, followed by the
/// context document in a fenced block and an optional note describing the
/// data.csv attachment.
inline RenderedPrompt render_augmented(const TemplateSet& templates, std::string_view code,
                                       std::string_view context,
                                       std::optional<std::string_view> data_attachment_note = {}) {
    detail::require_non_empty(code, "source code");
    try {
        (void)corpus::parse_dataset(context, "<context>");
    } catch (const ValidationError&) {
        throw;
    } catch (const ParseError& e) {
        throw ValidationError(std::string("malformed context document: ") + e.what());
    }
    std::string extra = "\n\n";
    extra += kContextHeader;
    extra += "\n```json\n";
    extra += context;
    extra += "\n```";
    if (data_attachment_note) {
        extra += "\n\ndata.csv: ";
        extra += *data_attachment_note;
    }
    return detail::render(templates, PromptKind::Augmented, {{"CODE", std::string(code)}}, extra);
}

inline RenderedPrompt render_judge(const TemplateSet& templates, PromptKind kind,
                                   const corpus::EvalPair& pair) {
    if (!is_judge_kind(kind)) {
        throw ArgumentError("render_judge: " + std::string(to_string(kind)) +
                            " is not a judge variant");
    }
    detail::require_non_empty(pair.source_code, "source code");
    detail::require_non_empty(pair.candidate_code, "candidate code");
    Bindings b = {{"SOURCE_CODE", pair.source_code}, {"TRANSLATED_CODE", pair.candidate_code}};
    if (needs_reference(kind)) {
        if (!pair.reference_code) {
            throw ArgumentError("render_judge: " + std::string(to_string(kind)) +
                                " requires a reference for pair \"" + pair.pair_id + "\"");
        }
        b.emplace_back("REFERENCE", *pair.reference_code);
    }
    return detail::render(templates, kind, b);
}

inline RenderedPrompt render_comparison(const TemplateSet& templates, std::string_view source,
                                        std::string_view candidate_a,
                                        std::string_view candidate_b) {
    detail::require_non_empty(source, "source code");
    detail::require_non_empty(candidate_a, "candidate A");
    detail::require_non_empty(candidate_b, "candidate B");
    return detail::render(templates, PromptKind::Comparison,
                          {{"CODE", std::string(source)},
                           {"TRANSLATE_CODE_A", std::string(candidate_a)},
                           {"TRANSLATE_CODE_B", std::string(candidate_b)}});
}

}  // namespace t2j::prompt
