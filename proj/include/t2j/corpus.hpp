// Copyright (c) 2026, T2J harness contributors
// SPDX-License-Identifier: Apache-2.0
//
// Fixed-bug dataset: loading, validation, fixing-cost statistics,
// leave-one-out context assembly and append-only fix recording.
//
// On disk a dataset is a UTF-8 JSON array. Each element carries exactly the
// keys Example_id, Input_Code, LLM_weak_output, LLM_fix_output, Errors and
// optionally Category / Subcategory. Each Errors item carries exactly
// Error_Code, Error, Fix_info, Fixed_Code. The key names are part of the
// augmented prompt's prose, so they must not change.

#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "t2j/error.hpp"
#include "t2j/io.hpp"

namespace t2j::corpus {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace keys {
inline constexpr const char* kExampleId = "Example_id";
inline constexpr const char* kInputCode = "Input_Code";
inline constexpr const char* kWeakOutput = "LLM_weak_output";
inline constexpr const char* kFixOutput = "LLM_fix_output";
inline constexpr const char* kErrors = "Errors";
inline constexpr const char* kCategory = "Category";
inline constexpr const char* kSubcategory = "Subcategory";
inline constexpr const char* kErrorCode = "Error_Code";
inline constexpr const char* kError = "Error";
inline constexpr const char* kFixInfo = "Fix_info";
inline constexpr const char* kFixedCode = "Fixed_Code";
}  // namespace keys

/// One recorded bug and its repair.
struct FixStep {
    std::string error_code;
    std::string error_message;
    std::string fix_info;
    std::string fixed_code;

    bool operator==(const FixStep&) const = default;
};

struct FixedBugEntry {
    std::string example_id;
    std::string input_code;
    std::string llm_weak_output;
    std::string llm_fix_output;
    std::vector<FixStep> errors;  // chronological fix order
    std::optional<std::string> category;
    std::optional<std::string> subcategory;

    bool operator==(const FixedBugEntry&) const = default;
};

using Dataset = std::vector<FixedBugEntry>;

/// The unit every metric consumes: source p_i, candidate j_i and an optional
/// reference translation.
struct EvalPair {
    std::string pair_id;
    std::string source_code;
    std::string candidate_code;
    std::optional<std::string> reference_code;

    bool operator==(const EvalPair&) const = default;
};

struct DatasetStats {
    std::size_t minimum = 0;
    std::size_t maximum = 0;
    double mean = 0.0;
    double median = 0.0;
    std::size_t total = 0;
};

// ---------------------------------------------------------------------------
// Validation

inline std::vector<std::string> validate_step(const FixStep& step) {
    std::vector<std::string> out;
    if (step.error_code.empty()) out.emplace_back("Error_Code is empty");
    if (step.fixed_code.empty()) out.emplace_back("Fixed_Code is empty");
    return out;
}

/// Returns one description per violated invariant; empty means valid.
inline std::vector<std::string> validate_entry(const FixedBugEntry& entry) {
    std::vector<std::string> out;
    if (entry.example_id.empty()) out.emplace_back("Example_id is empty");
    if (entry.errors.empty() && entry.llm_weak_output != entry.llm_fix_output) {
        out.emplace_back("Errors is empty but LLM_weak_output differs from LLM_fix_output");
    }
    for (std::size_t i = 0; i < entry.errors.size(); ++i) {
        for (const auto& v : validate_step(entry.errors[i])) {
            out.push_back("Errors[" + std::to_string(i) + "]: " + v);
        }
    }
    return out;
}

inline std::size_t count_fix_steps(const FixedBugEntry& entry) noexcept {
    return entry.errors.size();
}

// ---------------------------------------------------------------------------
// Serialization

inline ordered_json to_json(const FixStep& step) {
    ordered_json j;
    j[keys::kErrorCode] = step.error_code;
    j[keys::kError] = step.error_message;
    j[keys::kFixInfo] = step.fix_info;
    j[keys::kFixedCode] = step.fixed_code;
    return j;
}

inline ordered_json to_json(const FixedBugEntry& entry) {
    ordered_json j;
    j[keys::kExampleId] = entry.example_id;
    j[keys::kInputCode] = entry.input_code;
    j[keys::kWeakOutput] = entry.llm_weak_output;
    j[keys::kFixOutput] = entry.llm_fix_output;
    ordered_json errors = ordered_json::array();
    for (const auto& s : entry.errors) errors.push_back(to_json(s));
    j[keys::kErrors] = std::move(errors);
    if (entry.category) j[keys::kCategory] = *entry.category;
    if (entry.subcategory) j[keys::kSubcategory] = *entry.subcategory;
    return j;
}

inline ordered_json to_json(const Dataset& dataset) {
    ordered_json arr = ordered_json::array();
    for (const auto& e : dataset) arr.push_back(to_json(e));
    return arr;
}

/// Canonical text form: two-space indentation, fixed key order, file order.
inline std::string serialize_dataset(const Dataset& dataset) {
    return to_json(dataset).dump(2);
}

namespace detail {

inline std::string entry_label(std::size_t index, const nlohmann::json& element) {
    std::string label = "entry " + std::to_string(index);
    if (element.is_object()) {
        auto it = element.find(keys::kExampleId);
        if (it != element.end() && it->is_string()) {
            label += " (\"" + it->get<std::string>() + "\")";
        }
    }
    return label;
}

inline std::string require_string(const nlohmann::json& obj, const char* key,
                                  const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw ValidationError(where + ": missing required field \"" + key + "\"");
    }
    if (!it->is_string()) {
        throw ValidationError(where + ": field \"" + key + "\" must be a string");
    }
    return it->get<std::string>();
}

inline void reject_unknown_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                                const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw ValidationError(where + ": unknown field \"" + it.key() + "\"");
        }
    }
}

inline FixStep step_from_json(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + ": expected an object");
    reject_unknown_keys(j, {keys::kErrorCode, keys::kError, keys::kFixInfo, keys::kFixedCode},
                        where);
    return FixStep{require_string(j, keys::kErrorCode, where),
                   require_string(j, keys::kError, where),
                   require_string(j, keys::kFixInfo, where),
                   require_string(j, keys::kFixedCode, where)};
}

inline FixedBugEntry entry_from_json(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + ": expected an object");
    reject_unknown_keys(j,
                        {keys::kExampleId, keys::kInputCode, keys::kWeakOutput, keys::kFixOutput,
                         keys::kErrors, keys::kCategory, keys::kSubcategory},
                        where);
    FixedBugEntry e;
    e.example_id = require_string(j, keys::kExampleId, where);
    e.input_code = require_string(j, keys::kInputCode, where);
    e.llm_weak_output = require_string(j, keys::kWeakOutput, where);
    e.llm_fix_output = require_string(j, keys::kFixOutput, where);
    auto errs = j.find(keys::kErrors);
    if (errs == j.end()) {
        throw ValidationError(where + ": missing required field \"" + keys::kErrors + "\"");
    }
    if (!errs->is_array()) {
        throw ValidationError(where + ": field \"" + keys::kErrors + "\" must be an array");
    }
    for (std::size_t i = 0; i < errs->size(); ++i) {
        e.errors.push_back(
            step_from_json((*errs)[i], where + " Errors[" + std::to_string(i) + "]"));
    }
    for (auto [key, slot] : {std::pair{keys::kCategory, &e.category},
                             std::pair{keys::kSubcategory, &e.subcategory}}) {
        auto it = j.find(key);
        if (it == j.end() || it->is_null()) continue;
        if (!it->is_string()) {
            throw ValidationError(where + ": field \"" + key + "\" must be a string");
        }
        *slot = it->get<std::string>();
    }
    return e;
}

inline nlohmann::json parse_json(std::string_view text, std::string_view origin) {
    try {
        return nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& ex) {
        throw ParseError(std::string(origin) + ": " + ex.what(), ex.byte);
    }
}

}  // namespace detail

/// Parses and validates a dataset document. Entry order is preserved.
inline Dataset parse_dataset(std::string_view text, std::string_view origin = "<dataset>") {
    auto root = detail::parse_json(text, origin);
    if (!root.is_array()) {
        throw ValidationError(std::string(origin) + ": top-level value must be an array");
    }
    Dataset out;
    out.reserve(root.size());
    std::map<std::string, std::size_t> seen;
    for (std::size_t i = 0; i < root.size(); ++i) {
        const std::string where = std::string(origin) + ": " + detail::entry_label(i, root[i]);
        FixedBugEntry e = detail::entry_from_json(root[i], where);
        auto violations = validate_entry(e);
        if (!violations.empty()) {
            std::string msg = where + ": ";
            for (std::size_t k = 0; k < violations.size(); ++k) {
                msg += (k ? "; " : "") + violations[k];
            }
            throw ValidationError(msg);
        }
        auto [it, inserted] = seen.emplace(e.example_id, i);
        if (!inserted) {
            throw ValidationError(std::string(origin) + ": duplicate Example_id \"" +
                                  e.example_id + "\" in entry " + std::to_string(it->second) +
                                  " and entry " + std::to_string(i));
        }
        out.push_back(std::move(e));
    }
    return out;
}

inline Dataset load_dataset(const fs::path& path) {
    return parse_dataset(io::read_file(path), path.string());
}

inline void save_dataset(const fs::path& path, const Dataset& dataset) {
    io::atomic_write_file(path, serialize_dataset(dataset) + "\n");
}

// ---------------------------------------------------------------------------
// Statistics

/// Min/max/mean/median/total over per-entry fix-step counts.
inline DatasetStats dataset_stats(const Dataset& dataset) {
    if (dataset.empty()) throw DomainError("dataset_stats: dataset is empty");
    std::vector<std::size_t> counts;
    counts.reserve(dataset.size());
    for (const auto& e : dataset) counts.push_back(count_fix_steps(e));
    std::sort(counts.begin(), counts.end());

    DatasetStats s;
    s.minimum = counts.front();
    s.maximum = counts.back();
    s.total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    s.mean = static_cast<double>(s.total) / static_cast<double>(counts.size());
    const std::size_t mid = counts.size() / 2;
    s.median = counts.size() % 2 ? static_cast<double>(counts[mid])
                                 : (static_cast<double>(counts[mid - 1]) +
                                    static_cast<double>(counts[mid])) / 2.0;
    return s;
}

// ---------------------------------------------------------------------------
// Prompt context

inline const FixedBugEntry* find_entry(const Dataset& dataset, std::string_view id) {
    auto it = std::find_if(dataset.begin(), dataset.end(),
                           [&](const FixedBugEntry& e) { return e.example_id == id; });
    return it == dataset.end() ? nullptr : &*it;
}

/// Serialized dataset minus the entry `target_id`, in file order.
inline std::string leave_one_out_context(const Dataset& dataset, std::string_view target_id) {
    if (!find_entry(dataset, target_id)) {
        throw NotFoundError("leave_one_out_context: unknown Example_id \"" +
                            std::string(target_id) + "\"");
    }
    Dataset rest;
    rest.reserve(dataset.size() - 1);
    for (const auto& e : dataset) {
        if (e.example_id != target_id) rest.push_back(e);
    }
    return serialize_dataset(rest);
}

/// Full-dataset context, used for items that are not themselves entries.
inline std::string full_context(const Dataset& dataset) { return serialize_dataset(dataset); }

// ---------------------------------------------------------------------------
// Append-only fix recording

namespace detail {

struct Span {
    std::size_t begin;
    std::size_t end;  // one past the last byte
};

/// Byte spans of the top-level elements of a JSON array document. The text
/// must already be known to be valid JSON.
inline std::vector<Span> top_level_element_spans(std::string_view text) {
    std::vector<Span> spans;
    std::size_t i = 0;
    auto skip_ws = [&] {
        while (i < text.size() &&
               (text[i] == ' ' || text[i] == '\n' || text[i] == '\r' || text[i] == '\t')) {
            ++i;
        }
    };
    skip_ws();
    if (i >= text.size() || text[i] != '[') return spans;
    ++i;
    skip_ws();
    if (i < text.size() && text[i] == ']') return spans;
    while (i < text.size()) {
        skip_ws();
        const std::size_t start = i;
        int depth = 0;
        bool in_string = false;
        for (; i < text.size(); ++i) {
            char c = text[i];
            if (in_string) {
                if (c == '\\') {
                    ++i;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{' || c == '[') {
                ++depth;
            } else if (c == '}' || c == ']') {
                if (depth == 0) break;
                --depth;
            } else if (c == ',' && depth == 0) {
                break;
            }
        }
        std::size_t end = i;
        while (end > start && (text[end - 1] == ' ' || text[end - 1] == '\n' ||
                               text[end - 1] == '\r' || text[end - 1] == '\t')) {
            --end;
        }
        spans.push_back({start, end});
        if (i >= text.size() || text[i] == ']') break;
        ++i;  // ','
    }
    return spans;
}

inline std::string indent_continuation_lines(const std::string& text, std::size_t column) {
    std::string out;
    out.reserve(text.size());
    const std::string pad(column, ' ');
    for (char c : text) {
        out.push_back(c);
        if (c == '\n') out += pad;
    }
    return out;
}

}  // namespace detail

/// Appends `step` to the entry `example_id` of the dataset file at `path`.
/// The file is rewritten atomically under an exclusive lock; only the bytes
/// of the modified entry change.
inline FixedBugEntry append_fix_step(const fs::path& path, std::string_view example_id,
                                     const FixStep& step) {
    auto step_violations = validate_step(step);
    if (!step_violations.empty()) {
        std::string msg = "append_fix_step: invalid step: ";
        for (std::size_t k = 0; k < step_violations.size(); ++k) {
            msg += (k ? "; " : "") + step_violations[k];
        }
        throw ValidationError(msg);
    }

    io::FileLock lock(path);
    const std::string text = io::read_file(path);
    Dataset dataset = parse_dataset(text, path.string());
    auto it = std::find_if(dataset.begin(), dataset.end(),
                           [&](const FixedBugEntry& e) { return e.example_id == example_id; });
    if (it == dataset.end()) {
        throw NotFoundError("append_fix_step: unknown Example_id \"" + std::string(example_id) +
                            "\" in " + path.string());
    }
    it->errors.push_back(step);
    const auto index = static_cast<std::size_t>(it - dataset.begin());

    auto spans = detail::top_level_element_spans(text);
    std::string updated;
    if (spans.size() == dataset.size()) {
        const auto span = spans[index];
        const std::size_t line_start = text.rfind('\n', span.begin);
        const std::size_t column =
            line_start == std::string::npos ? span.begin : span.begin - line_start - 1;
        updated = text.substr(0, span.begin) +
                  detail::indent_continuation_lines(to_json(*it).dump(2), column) +
                  text.substr(span.end);
    } else {
        updated = serialize_dataset(dataset) + "\n";
    }
    io::atomic_write_file(path, updated);
    return *it;
}

// ---------------------------------------------------------------------------
// Plain parallel corpora: [{"id": ..., "source": ..., "reference": ...}, ...]

struct CorpusItem {
    std::string id;
    std::string source;
    std::optional<std::string> reference;

    bool operator==(const CorpusItem&) const = default;
};

inline std::vector<CorpusItem> parse_parallel_corpus(std::string_view text,
                                                     std::string_view origin = "<corpus>") {
    auto root = detail::parse_json(text, origin);
    if (!root.is_array()) {
        throw ValidationError(std::string(origin) + ": top-level value must be an array");
    }
    std::vector<CorpusItem> out;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < root.size(); ++i) {
        const auto& j = root[i];
        const std::string where = std::string(origin) + ": item " + std::to_string(i);
        if (!j.is_object()) throw ValidationError(where + ": expected an object");
        detail::reject_unknown_keys(j, {"id", "source", "reference"}, where);
        CorpusItem item;
        item.id = detail::require_string(j, "id", where);
        item.source = detail::require_string(j, "source", where);
        if (item.id.empty()) throw ValidationError(where + ": id is empty");
        if (item.source.empty()) throw ValidationError(where + ": source is empty");
        auto ref = j.find("reference");
        if (ref != j.end() && !ref->is_null()) {
            if (!ref->is_string()) throw ValidationError(where + ": reference must be a string");
            item.reference = ref->get<std::string>();
        }
        if (!seen.insert(item.id).second) {
            throw ValidationError(std::string(origin) + ": duplicate id \"" + item.id + "\"");
        }
        out.push_back(std::move(item));
    }
    return out;
}

inline std::vector<CorpusItem> load_parallel_corpus(const fs::path& path) {
    return parse_parallel_corpus(io::read_file(path), path.string());
}

}  // namespace t2j::corpus
