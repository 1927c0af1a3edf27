// Copyright (c) 2026, T2J harness contributors
// SPDX-License-Identifier: Apache-2.0
//
// Def-use extraction over the syntax tree and the dataflow match.
//
// Each entry is (variable, relation, sources):
//   * a load of name n gives (n, comesFrom, [n]) when n is already bound in
//     the current scope, else (n, comesFrom, []);
//   * binding target t gives (t, computedFrom, S) where S lists the distinct
//     names loaded by the bound value, in first-appearance order, without
//     descending into nested lambdas or comprehensions;
//   * `t op= v` also loads t and puts t first in S;
//   * parameters, imports and def/class names give (x, computedFrom, []).
// Values are visited before their targets. Function, class, lambda and
// comprehension bodies see a copy of the enclosing bound set; bindings made
// inside do not leak out. Branches are visited in source order and their
// bindings do accumulate.

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "t2j/codebleu/syntax.hpp"

namespace t2j::codebleu {

enum class FlowRelation { ComesFrom, ComputedFrom };

inline const char* to_string(FlowRelation r) {
    return r == FlowRelation::ComesFrom ? "comesFrom" : "computedFrom";
}

struct DataflowEntry {
    std::string var;
    FlowRelation relation = FlowRelation::ComesFrom;
    std::vector<std::string> sources;

    auto operator<=>(const DataflowEntry&) const = default;
};

namespace detail {

class FlowExtractor {
public:
    std::vector<DataflowEntry> run(const SyntaxNode& module) {
        for (const auto& s : module.children) stmt(s);
        return std::move(out_);
    }

private:
    static bool starts_with(const std::string& s, const char* p) { return s.rfind(p, 0) == 0; }

    static bool is_scope_node(const std::string& k) {
        return k == "Lambda" || k == "ListComp" || k == "SetComp" || k == "DictComp" ||
               k == "GeneratorExp";
    }

    void use(const std::string& name) {
        if (bound_.count(name)) {
            out_.push_back({name, FlowRelation::ComesFrom, {name}});
        } else {
            out_.push_back({name, FlowRelation::ComesFrom, {}});
        }
    }

    void define(const std::string& name, std::vector<std::string> sources) {
        out_.push_back({name, FlowRelation::ComputedFrom, std::move(sources)});
        bound_.insert(name);
    }

    static void collect_loads(const SyntaxNode& n, std::vector<std::string>& names) {
        if (n.kind == "Name") {
            for (const auto& x : names) {
                if (x == n.text) return;
            }
            names.push_back(n.text);
            return;
        }
        if (is_scope_node(n.kind)) return;
        for (const auto& c : n.children) collect_loads(c, names);
    }

    static std::vector<std::string> loads_of(const SyntaxNode& n) {
        std::vector<std::string> names;
        collect_loads(n, names);
        return names;
    }

    // -- statements ----------------------------------------------------------

    void block(const SyntaxNode& b) {
        for (const auto& s : b.children) stmt(s);
    }

    void stmt(const SyntaxNode& s) {
        const std::string& k = s.kind;
        if (k == "Assign") {
            const SyntaxNode& value = s.children.back();
            expr(value);
            const auto sources = loads_of(value);
            for (std::size_t i = 0; i + 1 < s.children.size(); ++i) bind(s.children[i], sources);
        } else if (starts_with(k, "AugAssign")) {
            const SyntaxNode& target = s.children[0];
            const SyntaxNode& value = s.children[1];
            expr(value);
            if (target.kind == "Name") {
                use(target.text);
                std::vector<std::string> sources{target.text};
                for (auto& n : loads_of(value)) {
                    if (n != target.text) sources.push_back(n);
                }
                define(target.text, std::move(sources));
            } else {
                expr(target);
            }
        } else if (k == "AnnAssign") {
            // children: target, annotation, [value]; annotations are not dataflow
            if (s.children.size() == 3) {
                expr(s.children[2]);
                bind(s.children[0], loads_of(s.children[2]));
            } else if (s.children[0].kind != "Name") {
                expr(s.children[0]);
            }
        } else if (k == "FunctionDef" || k == "AsyncFunctionDef") {
            function(s);
        } else if (k == "ClassDef") {
            std::string name;
            for (const auto& c : s.children) {
                if (c.kind == "ClassName") {
                    name = c.text;
                } else if (c.kind != "Block") {
                    expr(c);  // decorators, bases, keywords
                }
            }
            define(name, {});
            auto saved = bound_;
            block(s.children.back());
            bound_ = std::move(saved);
        } else if (k == "For" || k == "AsyncFor") {
            expr(s.children[1]);
            bind(s.children[0], loads_of(s.children[1]));
            for (std::size_t i = 2; i < s.children.size(); ++i) stmt_part(s.children[i]);
        } else if (k == "With" || k == "AsyncWith") {
            for (const auto& c : s.children) {
                if (c.kind == "WithItem") {
                    expr(c.children[0]);
                    if (c.children.size() > 1) bind(c.children[1], loads_of(c.children[0]));
                } else {
                    stmt_part(c);
                }
            }
        } else if (k == "Try") {
            for (const auto& c : s.children) {
                if (c.kind == "ExceptHandler") {
                    std::vector<std::string> sources;
                    for (const auto& h : c.children) {
                        if (h.kind == "AsName") {
                            define(h.text, sources);
                        } else if (h.kind == "Block") {
                            block(h);
                        } else {
                            expr(h);
                            sources = loads_of(h);
                        }
                    }
                } else {
                    stmt_part(c);
                }
            }
        } else if (k == "Import" || k == "ImportFrom") {
            for (const auto& c : s.children) {
                if (c.kind == "Alias" && c.text != "*") define(c.text, {});
            }
        } else if (k == "Global" || k == "Nonlocal" || k == "Pass" || k == "Break" ||
                   k == "Continue") {
        } else {
            // If/While/Return/Expr/Raise/Assert/Delete and friends
            for (const auto& c : s.children) stmt_part(c);
        }
    }

    /// A child of a compound statement: nested block, else-branch or expression.
    void stmt_part(const SyntaxNode& c) {
        if (c.kind == "Block" || c.kind == "Finally") {
            if (c.kind == "Block") {
                block(c);
            } else {
                for (const auto& b : c.children) block(b);
            }
        } else if (c.kind == "OrElse") {
            for (const auto& b : c.children) {
                if (b.kind == "Block") {
                    block(b);
                } else {
                    stmt(b);  // elif
                }
            }
        } else {
            expr(c);
        }
    }

    void function(const SyntaxNode& s) {
        std::string name;
        const SyntaxNode* args = nullptr;
        for (const auto& c : s.children) {
            if (c.kind == "Decorator") expr(c);
            if (c.kind == "FuncName") name = c.text;
            if (c.kind == "Arguments") args = &c;
        }
        if (args) param_defaults(*args);
        define(name, {});
        auto saved = bound_;
        if (args) param_bindings(*args);
        block(s.children.back());
        bound_ = std::move(saved);
    }

    void param_defaults(const SyntaxNode& args) {
        for (const auto& p : args.children) {
            for (const auto& part : p.children) {
                if (part.kind == "Default") expr(part);
            }
        }
    }

    void param_bindings(const SyntaxNode& args) {
        for (const auto& p : args.children) {
            for (const auto& part : p.children) {
                if (part.kind == "ArgName") define(part.text, {});
            }
        }
    }

    void bind(const SyntaxNode& target, const std::vector<std::string>& sources) {
        if (target.kind == "Name") {
            define(target.text, sources);
        } else if (target.kind == "Tuple" || target.kind == "List") {
            for (const auto& c : target.children) bind(c, sources);
        } else if (target.kind == "Starred") {
            bind(target.children[0], sources);
        } else {
            expr(target);  // attribute / subscript stores read their base
        }
    }

    // -- expressions -----------------------------------------------------------

    void expr(const SyntaxNode& n) {
        const std::string& k = n.kind;
        if (k == "Name") {
            use(n.text);
        } else if (k == "NamedExpr") {
            expr(n.children[1]);
            define(n.children[0].text, loads_of(n.children[1]));
        } else if (k == "Lambda") {
            param_defaults(n.children[0]);
            auto saved = bound_;
            param_bindings(n.children[0]);
            expr(n.children[1]);
            bound_ = std::move(saved);
        } else if (k == "ListComp" || k == "SetComp" || k == "DictComp" || k == "GeneratorExp") {
            auto saved = bound_;
            for (std::size_t i = 1; i < n.children.size(); ++i) {
                const SyntaxNode& comp = n.children[i];
                expr(comp.children[1]);
                bind(comp.children[0], loads_of(comp.children[1]));
                for (std::size_t j = 2; j < comp.children.size(); ++j) expr(comp.children[j]);
            }
            expr(n.children[0]);
            bound_ = std::move(saved);
        } else if (k == "Keyword") {
            expr(n.children[1]);
        } else {
            for (const auto& c : n.children) expr(c);
        }
    }

    std::set<std::string> bound_;
    std::vector<DataflowEntry> out_;
};

}  // namespace detail

/// Dataflow entries of a parsed module, in visit order.
inline std::vector<DataflowEntry> extract_dataflow(const SyntaxNode& module) {
    return detail::FlowExtractor{}.run(module);
}

/// Renames variables to var_0, var_1, ... by first appearance (entry
/// variable first, then its sources).
inline std::vector<DataflowEntry> normalize_dataflow(const std::vector<DataflowEntry>& entries) {
    std::map<std::string, std::string> names;
    auto rename = [&](const std::string& v) -> const std::string& {
        auto it = names.find(v);
        if (it == names.end()) {
            it = names.emplace(v, "var_" + std::to_string(names.size())).first;
        }
        return it->second;
    };
    std::vector<DataflowEntry> out;
    out.reserve(entries.size());
    for (const auto& e : entries) {
        DataflowEntry n{rename(e.var), e.relation, {}};
        for (const auto& s : e.sources) n.sources.push_back(rename(s));
        out.push_back(std::move(n));
    }
    return out;
}

/// Matched normalized reference entries / all reference entries; empty when
/// the reference has none.
inline std::optional<double> dataflow_match(const SyntaxNode& candidate,
                                            const SyntaxNode& reference) {
    const auto ref = normalize_dataflow(extract_dataflow(reference));
    if (ref.empty()) return std::nullopt;
    std::map<DataflowEntry, std::size_t> pool;
    for (auto& e : normalize_dataflow(extract_dataflow(candidate))) ++pool[e];
    std::size_t matched = 0;
    for (const auto& e : ref) {
        auto it = pool.find(e);
        if (it != pool.end() && it->second > 0) {
            --it->second;
            ++matched;
        }
    }
    return static_cast<double>(matched) / static_cast<double>(ref.size());
}

}  // namespace t2j::codebleu
