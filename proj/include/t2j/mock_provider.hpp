// Copyright (c) 2026, T2J harness contributors
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic offline provider. It recognizes which template produced the
// prompt and answers in kind:
//
//   translation   rule-based torch -> jax rewrite, wrapped in a fenced block;
//                 models listed as "strong" get a larger rule table
//   augmented     the same, then every Error_Code -> Fixed_Code patch from
//                 the inlined context is applied
//   rubric        score from leftover torch tokens and, for the reference
//                 variants, token overlap with the reference
//   comparison    prefers the candidate with fewer leftover torch tokens and
//                 reports a tie when they are equal
//
// The answers depend only on the prompt text and model id.

#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "t2j/codebleu/lexer.hpp"
#include "t2j/llm_client.hpp"
#include "t2j/prompt.hpp"

namespace t2j::llm {

namespace mock_detail {

using Rule = std::pair<std::string_view, std::string_view>;

inline const std::vector<Rule>& basic_rules() {
    static const std::vector<Rule> rules = {
        {"import torch.nn.functional as F", "import jax.nn as F"},
        {"import torch.nn as nn", "import flax.linen as nn"},
        {"import torch\n", "import jax\nimport jax.numpy as jnp\n"},
        {"torch.tensor(", "jnp.array("},
        {"torch.zeros(", "jnp.zeros("},
        {"torch.ones(", "jnp.ones("},
        {"torch.arange(", "jnp.arange("},
        {"torch.matmul(", "jnp.matmul("},
        {"torch.sum(", "jnp.sum("},
        {"torch.mean(", "jnp.mean("},
        {"torch.exp(", "jnp.exp("},
        {"torch.log(", "jnp.log("},
        {"torch.sqrt(", "jnp.sqrt("},
        {"torch.tanh(", "jnp.tanh("},
        {"torch.relu(", "jax.nn.relu("},
        {"torch.sigmoid(", "jax.nn.sigmoid("},
        {"torch.cat(", "jnp.concatenate("},
        {"torch.stack(", "jnp.stack("},
        {"torch.float32", "jnp.float32"},
    };
    return rules;
}

inline const std::vector<Rule>& strong_rules() {
    static const std::vector<Rule> rules = {
        {"torch.randn(", "jax.random.normal(jax.random.PRNGKey(0), "},
        {"torch.rand(", "jax.random.uniform(jax.random.PRNGKey(0), "},
        {"torch.manual_seed(", "jax.random.PRNGKey("},
        {"with torch.no_grad():", "if True:"},
        {".view(", ".reshape("},
        {".numpy()", ""},
        {".item()", ""},
        {"nn.Linear(", "nn.Dense("},
        {"torch.optim.SGD(", "optax.sgd("},
        {"torch.optim.Adam(", "optax.adam("},
        {"F.softmax(", "jax.nn.softmax("},
        {"F.relu(", "jax.nn.relu("},
        {"def forward(self", "def __call__(self"},
    };
    return rules;
}

inline void replace_all(std::string& s, std::string_view from, std::string_view to) {
    if (from.empty()) return;
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
}

inline std::string translate(std::string code, bool strong) {
    if (!code.empty() && code.back() != '\n') code.push_back('\n');
    if (strong) {
        for (const auto& [from, to] : strong_rules()) replace_all(code, from, to);
    }
    for (const auto& [from, to] : basic_rules()) replace_all(code, from, to);
    while (!code.empty() && code.back() == '\n') code.pop_back();
    return code;
}

inline std::size_t torch_tokens(std::string_view code) {
    std::size_t n = 0;
    for (const auto& t : codebleu::tokenize(code)) n += t.text == "torch" ? 1 : 0;
    return n;
}

inline double jaccard(std::string_view a, std::string_view b) {
    std::set<std::string> sa, sb;
    for (auto& t : codebleu::tokenize(a)) sa.insert(t.text);
    for (auto& t : codebleu::tokenize(b)) sb.insert(t.text);
    if (sa.empty() && sb.empty()) return 1.0;
    std::size_t inter = 0;
    for (const auto& t : sa) inter += sb.count(t);
    return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
}

/// Text between `open` and the next `close` after it (or the end).
inline std::string between(std::string_view text, std::string_view open, std::string_view close,
                           std::size_t from = 0) {
    auto a = text.find(open, from);
    if (a == std::string_view::npos) return {};
    a += open.size();
    auto b = close.empty() ? std::string_view::npos : text.find(close, a);
    return std::string(text.substr(a, b == std::string_view::npos ? text.size() - a : b - a));
}

inline std::string fenced(std::string_view code) {
    return "Here is the JAX translation:\n\n```python\n" + std::string(code) + "\n```\n";
}

}  // namespace mock_detail

class MockProvider final : public Provider {
public:
    /// Models in `strong_models` use the extended rewrite table.
    explicit MockProvider(std::set<std::string> strong_models = {})
        : strong_(std::move(strong_models)) {}

    std::string complete(const ChatRequest& request) override {
        namespace md = mock_detail;
        const std::string& p = request.prompt;
        const bool strong = strong_.count(request.model) != 0;

        if (p.find("Translated Code Candidate A") != std::string::npos) {
            const auto a = md::between(p, "2. Translated Code A:\n\n", "\n\n3. Translated Code B:");
            const auto b = md::between(p, "3. Translated Code B:\n\n", "\n\nPlease also provide");
            const auto ta = md::torch_tokens(a);
            const auto tb = md::torch_tokens(b);
            if (ta == tb) {
                return "Both candidates are equally good translations; neither is better.";
            }
            const char* winner = ta < tb ? "A" : "B";
            return std::string("Candidate ") + winner +
                   " is better because it leaves fewer PyTorch calls untranslated.";
        }

        if (p.find("(scores ONLY):") != std::string::npos) {
            const bool use = p.find("Usefulness (scores ONLY):") != std::string::npos;
            const bool has_ref = p.find("Reference JAX Code Snippet:") != std::string::npos;
            const auto translated =
                md::between(p, "Translated JAX Code Snippet:\n\n",
                            has_ref ? "\n\nReference JAX Code Snippet:" : "\n\nEvaluation Form:");
            const auto leftover = static_cast<long>(md::torch_tokens(translated));
            double base = 4.0;
            if (has_ref) {
                const auto ref = md::between(p, "Reference JAX Code Snippet:\n\n",
                                             "\n\nEvaluation Form:");
                base = 4.0 * md::jaccard(translated, ref);
            }
            const long penalty = use ? (leftover + 1) / 2 : leftover;
            const long score = std::clamp(std::lround(base) - penalty, 0L, 4L);
            return (use ? "Usefulness: " : "Functional Correctness: ") + std::to_string(score);
        }

        const std::string marker = "Input Source Code Snippet:\n";
        const std::string ctx_marker = "\n\n" + std::string(prompt::kContextHeader);
        if (p.find(ctx_marker) != std::string::npos) {
            const auto code = md::between(p, marker, ctx_marker);
            std::string out = md::translate(code, strong);
            const auto ctx_start = p.rfind("```json\n");
            const auto ctx_end = p.rfind("\n```");
            if (ctx_start != std::string::npos && ctx_end != std::string::npos &&
                ctx_end > ctx_start) {
                const auto ctx = nlohmann::json::parse(
                    p.substr(ctx_start + 8, ctx_end - ctx_start - 8), nullptr, false);
                if (ctx.is_array()) {
                    for (const auto& entry : ctx) {
                        for (const auto& step : entry.value("Errors", nlohmann::json::array())) {
                            md::replace_all(out, step.value("Error_Code", ""),
                                            step.value("Fixed_Code", ""));
                        }
                    }
                }
            }
            return md::fenced(out);
        }
        if (auto pos = p.find(marker); pos != std::string::npos) {
            return md::fenced(md::translate(p.substr(pos + marker.size()), strong));
        }
        return "I can only help with PyTorch to JAX translation.";
    }

    std::string name() const override { return "mock"; }

private:
    std::set<std::string> strong_;
};

}  // namespace t2j::llm
