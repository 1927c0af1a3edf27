// Copyright (c) 2026, T2J harness contributors
// SPDX-License-Identifier: Apache-2.0
//
// Recursive-descent parser for Python 3 statements and expressions, and the
// subtree-signature match used by the syntax component.
//
// Node kinds follow the usual AST vocabulary (Module, FunctionDef, Assign,
// BinOp+, Call, Name, ...). Operators are folded into the kind label so that
// `a + b` and `a * b` have different shapes. Leaves keep their source text
// and byte offset, but signatures only use kind labels.

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "t2j/codebleu/lexer.hpp"

namespace t2j::codebleu {

struct SyntaxNode {
    std::string kind;
    std::string text;         // leaves only
    std::size_t offset = 0;   // leaves only
    std::vector<SyntaxNode> children;

    bool is_leaf() const noexcept { return children.empty(); }
};

namespace detail {

struct SyntaxFailure {
    std::size_t offset;
    std::string what;
};

class Parser {
public:
    explicit Parser(std::vector<RawToken> tokens) : toks_(std::move(tokens)) {}

    SyntaxNode parse_module() {
        for (const auto& t : toks_) {
            if (t.kind == RawKind::Error) fail("unlexable input '" + t.text + "'");
        }
        SyntaxNode mod{"Module", {}, 0, {}};
        while (!at(RawKind::EndMarker)) {
            if (at(RawKind::Newline)) {
                ++pos_;
                continue;
            }
            statement(mod.children);
        }
        return mod;
    }

private:
    // -- token helpers -----------------------------------------------------

    const RawToken& peek(std::size_t k = 0) const {
        const std::size_t i = std::min(pos_ + k, toks_.size() - 1);
        return toks_[i];
    }
    bool at(RawKind k) const { return peek().kind == k; }
    bool at_op(std::string_view op, std::size_t k = 0) const {
        return peek(k).kind == RawKind::Op && peek(k).text == op;
    }
    bool at_kw(std::string_view kw, std::size_t k = 0) const {
        return peek(k).kind == RawKind::Name && peek(k).text == kw;
    }
    bool accept_op(std::string_view op) {
        if (!at_op(op)) return false;
        ++pos_;
        return true;
    }
    bool accept_kw(std::string_view kw) {
        if (!at_kw(kw)) return false;
        ++pos_;
        return true;
    }
    void expect_op(std::string_view op) {
        if (!accept_op(op)) fail("expected '" + std::string(op) + "'");
    }
    void expect_kw(std::string_view kw) {
        if (!accept_kw(kw)) fail("expected '" + std::string(kw) + "'");
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw SyntaxFailure{peek().offset, what};
    }

    SyntaxNode leaf(std::string kind, const RawToken& t) {
        return SyntaxNode{std::move(kind), t.text, t.offset, {}};
    }
    static SyntaxNode node(std::string kind, std::vector<SyntaxNode> children = {}) {
        return SyntaxNode{std::move(kind), {}, 0, std::move(children)};
    }

    SyntaxNode name_leaf(std::string kind) {
        if (!at(RawKind::Name) || is_python_keyword(peek().text)) fail("expected identifier");
        return leaf(std::move(kind), toks_[pos_++]);
    }

    bool starts_expression() const {
        const auto& t = peek();
        switch (t.kind) {
            case RawKind::Number:
            case RawKind::String: return true;
            case RawKind::Name:
                if (!is_python_keyword(t.text)) return true;
                return t.text == "not" || t.text == "lambda" || t.text == "await" ||
                       t.text == "None" || t.text == "True" || t.text == "False" ||
                       t.text == "yield";
            case RawKind::Op:
                return t.text == "(" || t.text == "[" || t.text == "{" || t.text == "-" ||
                       t.text == "+" || t.text == "~" || t.text == "*" || t.text == "..." ||
                       t.text == "**";
            default: return false;
        }
    }

    // -- statements --------------------------------------------------------

    void statement(std::vector<SyntaxNode>& out) {
        if (at_op("@")) {
            out.push_back(decorated());
            return;
        }
        if (at(RawKind::Name)) {
            const std::string& w = peek().text;
            if (w == "def") return out.push_back(funcdef({}, false));
            if (w == "class") return out.push_back(classdef({}));
            if (w == "if") return out.push_back(if_stmt());
            if (w == "while") return out.push_back(while_stmt());
            if (w == "for") return out.push_back(for_stmt(false));
            if (w == "try") return out.push_back(try_stmt());
            if (w == "with") return out.push_back(with_stmt(false));
            if (w == "async") {
                if (at_kw("def", 1)) {
                    ++pos_;
                    return out.push_back(funcdef({}, true));
                }
                if (at_kw("for", 1)) {
                    ++pos_;
                    return out.push_back(for_stmt(true));
                }
                if (at_kw("with", 1)) {
                    ++pos_;
                    return out.push_back(with_stmt(true));
                }
            }
        }
        simple_stmts(out);
    }

    void simple_stmts(std::vector<SyntaxNode>& out) {
        out.push_back(small_stmt());
        while (accept_op(";")) {
            if (at(RawKind::Newline) || at(RawKind::EndMarker)) break;
            out.push_back(small_stmt());
        }
        if (at(RawKind::EndMarker)) return;
        if (!at(RawKind::Newline)) fail("expected end of statement");
        ++pos_;
    }

    SyntaxNode small_stmt() {
        if (at(RawKind::Name)) {
            const std::string w = peek().text;
            if (w == "pass" || w == "break" || w == "continue") {
                ++pos_;
                return node(w == "pass" ? "Pass" : (w == "break" ? "Break" : "Continue"));
            }
            if (w == "return") {
                ++pos_;
                SyntaxNode n = node("Return");
                if (starts_expression()) n.children.push_back(testlist_star_expr());
                return n;
            }
            if (w == "raise") {
                ++pos_;
                SyntaxNode n = node("Raise");
                if (starts_expression()) {
                    n.children.push_back(test());
                    if (accept_kw("from")) n.children.push_back(test());
                }
                return n;
            }
            if (w == "global" || w == "nonlocal") {
                ++pos_;
                SyntaxNode n = node(w == "global" ? "Global" : "Nonlocal");
                n.children.push_back(name_leaf("Identifier"));
                while (accept_op(",")) n.children.push_back(name_leaf("Identifier"));
                return n;
            }
            if (w == "del") {
                ++pos_;
                return node("Delete", {exprlist()});
            }
            if (w == "assert") {
                ++pos_;
                SyntaxNode n = node("Assert", {test()});
                if (accept_op(",")) n.children.push_back(test());
                return n;
            }
            if (w == "import") {
                ++pos_;
                SyntaxNode n = node("Import");
                do {
                    n.children.push_back(dotted_as_name());
                } while (accept_op(","));
                return n;
            }
            if (w == "from") return import_from();
        }
        return expr_stmt();
    }

    // `import a.b.c as d` binds d; `import a.b.c` binds a.
    SyntaxNode dotted_as_name() {
        SyntaxNode first = name_leaf("Alias");
        std::string bound = first.text;
        std::size_t offset = first.offset;
        std::string full = first.text;
        while (accept_op(".")) full += "." + name_leaf("Alias").text;
        if (accept_kw("as")) {
            SyntaxNode as = name_leaf("Alias");
            bound = as.text;
            offset = as.offset;
        }
        SyntaxNode n{"Alias", bound, offset, {}};
        return n;
    }

    SyntaxNode import_from() {
        expect_kw("from");
        std::string module;
        while (at_op(".") || at_op("...")) module += toks_[pos_++].text;
        if (!at_kw("import")) {
            module += name_leaf("Module").text;
            while (accept_op(".")) module += "." + name_leaf("Module").text;
        }
        expect_kw("import");
        SyntaxNode n = node("ImportFrom");
        n.children.push_back(SyntaxNode{"Module", module, 0, {}});
        if (accept_op("*")) {
            n.children.push_back(SyntaxNode{"Alias", "*", 0, {}});
            return n;
        }
        const bool paren = accept_op("(");
        do {
            if (paren && at_op(")")) break;
            SyntaxNode name = name_leaf("Alias");
            if (accept_kw("as")) name = name_leaf("Alias");
            n.children.push_back(std::move(name));
        } while (accept_op(","));
        if (paren) expect_op(")");
        return n;
    }

    static bool is_augassign(std::string_view op) {
        return op == "+=" || op == "-=" || op == "*=" || op == "/=" || op == "//=" ||
               op == "%=" || op == "**=" || op == ">>=" || op == "<<=" || op == "&=" ||
               op == "^=" || op == "|=" || op == "@=";
    }

    SyntaxNode expr_stmt() {
        SyntaxNode first = testlist_star_expr();
        if (accept_op(":")) {
            SyntaxNode n = node("AnnAssign", {std::move(first), test()});
            if (accept_op("=")) n.children.push_back(at_kw("yield") ? yield_expr()
                                                                    : testlist_star_expr());
            return n;
        }
        if (at(RawKind::Op) && is_augassign(peek().text)) {
            std::string op = toks_[pos_++].text;
            SyntaxNode value = at_kw("yield") ? yield_expr() : testlist_star_expr();
            return node("AugAssign" + op, {std::move(first), std::move(value)});
        }
        if (at_op("=")) {
            SyntaxNode n = node("Assign", {std::move(first)});
            while (accept_op("=")) {
                n.children.push_back(at_kw("yield") ? yield_expr() : testlist_star_expr());
            }
            return n;
        }
        return node("Expr", {std::move(first)});
    }

    // -- compound statements -------------------------------------------------

    SyntaxNode block() {
        SyntaxNode b = node("Block");
        if (at(RawKind::Newline)) {
            ++pos_;
            if (!at(RawKind::Indent)) fail("expected an indented block");
            ++pos_;
            while (!at(RawKind::Dedent) && !at(RawKind::EndMarker)) {
                if (at(RawKind::Newline)) {
                    ++pos_;
                    continue;
                }
                statement(b.children);
            }
            if (at(RawKind::Dedent)) ++pos_;
        } else {
            simple_stmts(b.children);
        }
        if (b.children.empty()) fail("empty block");
        return b;
    }

    SyntaxNode if_stmt() {
        ++pos_;  // 'if' or 'elif'
        SyntaxNode n = node("If", {namedexpr_test()});
        expect_op(":");
        n.children.push_back(block());
        if (at_kw("elif")) {
            n.children.push_back(node("OrElse", {if_stmt()}));
        } else if (accept_kw("else")) {
            expect_op(":");
            n.children.push_back(node("OrElse", {block()}));
        }
        return n;
    }

    SyntaxNode while_stmt() {
        expect_kw("while");
        SyntaxNode n = node("While", {namedexpr_test()});
        expect_op(":");
        n.children.push_back(block());
        if (accept_kw("else")) {
            expect_op(":");
            n.children.push_back(node("OrElse", {block()}));
        }
        return n;
    }

    SyntaxNode for_stmt(bool is_async) {
        expect_kw("for");
        SyntaxNode target = exprlist();
        expect_kw("in");
        SyntaxNode iter = testlist();
        expect_op(":");
        SyntaxNode n = node(is_async ? "AsyncFor" : "For",
                            {std::move(target), std::move(iter), block()});
        if (accept_kw("else")) {
            expect_op(":");
            n.children.push_back(node("OrElse", {block()}));
        }
        return n;
    }

    SyntaxNode try_stmt() {
        expect_kw("try");
        expect_op(":");
        SyntaxNode n = node("Try", {block()});
        bool handlers = false;
        while (at_kw("except")) {
            ++pos_;
            handlers = true;
            SyntaxNode h = node("ExceptHandler");
            accept_op("*");
            if (!at_op(":")) {
                h.children.push_back(test());
                if (accept_kw("as")) h.children.push_back(name_leaf("AsName"));
            }
            expect_op(":");
            h.children.push_back(block());
            n.children.push_back(std::move(h));
        }
        if (accept_kw("else")) {
            expect_op(":");
            n.children.push_back(node("OrElse", {block()}));
        }
        if (accept_kw("finally")) {
            expect_op(":");
            n.children.push_back(node("Finally", {block()}));
        } else if (!handlers) {
            fail("try without except or finally");
        }
        return n;
    }

    SyntaxNode with_stmt(bool is_async) {
        expect_kw("with");
        SyntaxNode n = node(is_async ? "AsyncWith" : "With");
        do {
            SyntaxNode item = node("WithItem", {test()});
            if (accept_kw("as")) item.children.push_back(expr());
            n.children.push_back(std::move(item));
        } while (accept_op(","));
        expect_op(":");
        n.children.push_back(block());
        return n;
    }

    SyntaxNode decorated() {
        std::vector<SyntaxNode> decorators;
        while (accept_op("@")) {
            decorators.push_back(node("Decorator", {namedexpr_test()}));
            if (!at(RawKind::Newline)) fail("expected newline after decorator");
            ++pos_;
        }
        if (at_kw("def")) return funcdef(std::move(decorators), false);
        if (at_kw("async") && at_kw("def", 1)) {
            ++pos_;
            return funcdef(std::move(decorators), true);
        }
        if (at_kw("class")) return classdef(std::move(decorators));
        fail("expected def or class after decorator");
    }

    SyntaxNode funcdef(std::vector<SyntaxNode> decorators, bool is_async) {
        expect_kw("def");
        SyntaxNode n = node(is_async ? "AsyncFunctionDef" : "FunctionDef", std::move(decorators));
        n.children.push_back(name_leaf("FuncName"));
        expect_op("(");
        n.children.push_back(arguments(")", true));
        expect_op(")");
        if (accept_op("->")) n.children.push_back(node("Returns", {test()}));
        expect_op(":");
        n.children.push_back(block());
        return n;
    }

    SyntaxNode classdef(std::vector<SyntaxNode> decorators) {
        expect_kw("class");
        SyntaxNode n = node("ClassDef", std::move(decorators));
        n.children.push_back(name_leaf("ClassName"));
        if (accept_op("(")) {
            while (!at_op(")")) {
                n.children.push_back(argument());
                if (!accept_op(",")) break;
            }
            expect_op(")");
        }
        expect_op(":");
        n.children.push_back(block());
        return n;
    }

    /// Parameter list up to (not including) `close`. Annotations are only
    /// allowed in def signatures.
    SyntaxNode arguments(std::string_view close, bool annotations) {
        SyntaxNode args = node("Arguments");
        while (!at_op(close)) {
            if (accept_op("/")) {
                args.children.push_back(node("PosOnlyMarker"));
            } else if (at_op("*") || at_op("**")) {
                const std::string star = toks_[pos_++].text;
                if (star == "*" && (at_op(",") || at_op(close))) {
                    args.children.push_back(node("KwOnlyMarker"));
                } else {
                    args.children.push_back(
                        param(star == "*" ? "VarArg" : "KwArg", annotations, false));
                }
            } else {
                args.children.push_back(param("Arg", annotations, true));
            }
            if (!accept_op(",")) break;
        }
        return args;
    }

    SyntaxNode param(std::string kind, bool annotations, bool defaults) {
        SyntaxNode p = node(std::move(kind), {name_leaf("ArgName")});
        if (annotations && accept_op(":")) p.children.push_back(node("Annotation", {test()}));
        if (defaults && accept_op("=")) p.children.push_back(node("Default", {test()}));
        return p;
    }

    // -- expressions ---------------------------------------------------------

    SyntaxNode testlist_star_expr() {
        SyntaxNode first = at_op("*") ? star_expr() : test();
        if (!at_op(",")) return first;
        SyntaxNode tup = node("Tuple", {std::move(first)});
        while (accept_op(",")) {
            if (!starts_expression()) break;
            tup.children.push_back(at_op("*") ? star_expr() : test());
        }
        return tup;
    }

    SyntaxNode testlist() {
        SyntaxNode first = test();
        if (!at_op(",")) return first;
        SyntaxNode tup = node("Tuple", {std::move(first)});
        while (accept_op(",")) {
            if (!starts_expression()) break;
            tup.children.push_back(test());
        }
        return tup;
    }

    SyntaxNode exprlist() {
        SyntaxNode first = at_op("*") ? star_expr() : expr();
        if (!at_op(",")) return first;
        SyntaxNode tup = node("Tuple", {std::move(first)});
        while (accept_op(",")) {
            if (!starts_expression()) break;
            tup.children.push_back(at_op("*") ? star_expr() : expr());
        }
        return tup;
    }

    SyntaxNode star_expr() {
        expect_op("*");
        return node("Starred", {expr()});
    }

    SyntaxNode yield_expr() {
        expect_kw("yield");
        if (accept_kw("from")) return node("YieldFrom", {test()});
        SyntaxNode n = node("Yield");
        if (starts_expression()) n.children.push_back(testlist_star_expr());
        return n;
    }

    SyntaxNode namedexpr_test() {
        SyntaxNode t = test();
        if (accept_op(":=")) {
            if (t.kind != "Name") fail("invalid assignment target for ':='");
            return node("NamedExpr", {std::move(t), test()});
        }
        return t;
    }

    SyntaxNode test() {
        if (at_kw("lambda")) return lambdef();
        SyntaxNode body = or_test();
        if (accept_kw("if")) {
            SyntaxNode cond = or_test();
            expect_kw("else");
            return node("IfExp", {std::move(cond), std::move(body), test()});
        }
        return body;
    }

    SyntaxNode lambdef() {
        expect_kw("lambda");
        SyntaxNode args = arguments(":", false);
        expect_op(":");
        return node("Lambda", {std::move(args), test()});
    }

    SyntaxNode or_test() {
        SyntaxNode first = and_test();
        if (!at_kw("or")) return first;
        SyntaxNode n = node("BoolOp:or", {std::move(first)});
        while (accept_kw("or")) n.children.push_back(and_test());
        return n;
    }

    SyntaxNode and_test() {
        SyntaxNode first = not_test();
        if (!at_kw("and")) return first;
        SyntaxNode n = node("BoolOp:and", {std::move(first)});
        while (accept_kw("and")) n.children.push_back(not_test());
        return n;
    }

    SyntaxNode not_test() {
        if (accept_kw("not")) return node("UnaryOp:not", {not_test()});
        return comparison();
    }

    std::optional<std::string> comp_op() {
        static constexpr std::string_view kOps[] = {"<", ">", "==", ">=", "<=", "!="};
        for (auto op : kOps) {
            if (accept_op(op)) return std::string(op);
        }
        if (accept_kw("in")) return "in";
        if (at_kw("not") && at_kw("in", 1)) {
            pos_ += 2;
            return "not in";
        }
        if (accept_kw("is")) return accept_kw("not") ? "is not" : "is";
        return std::nullopt;
    }

    SyntaxNode comparison() {
        SyntaxNode first = expr();
        auto op = comp_op();
        if (!op) return first;
        std::string kind = "Compare:" + *op;
        std::vector<SyntaxNode> operands{std::move(first), expr()};
        while ((op = comp_op())) {
            kind += "," + *op;
            operands.push_back(expr());
        }
        return node(std::move(kind), std::move(operands));
    }

    static int binary_precedence(std::string_view op) {
        if (op == "|") return 1;
        if (op == "^") return 2;
        if (op == "&") return 3;
        if (op == "<<" || op == ">>") return 4;
        if (op == "+" || op == "-") return 5;
        if (op == "*" || op == "/" || op == "//" || op == "%" || op == "@") return 6;
        return 0;
    }

    SyntaxNode expr(int min_prec = 1) {
        SyntaxNode lhs = factor();
        while (at(RawKind::Op)) {
            const std::string op = peek().text;
            const int prec = binary_precedence(op);
            if (prec == 0 || prec < min_prec) break;
            ++pos_;
            SyntaxNode rhs = expr(prec + 1);
            lhs = node("BinOp" + op, {std::move(lhs), std::move(rhs)});
        }
        return lhs;
    }

    SyntaxNode factor() {
        if (at_op("+") || at_op("-") || at_op("~")) {
            const std::string op = toks_[pos_++].text;
            return node("UnaryOp" + op, {factor()});
        }
        return power();
    }

    SyntaxNode power() {
        SyntaxNode base = await_primary();
        if (accept_op("**")) return node("BinOp**", {std::move(base), factor()});
        return base;
    }

    SyntaxNode await_primary() {
        if (accept_kw("await")) return node("Await", {atom_expr()});
        return atom_expr();
    }

    SyntaxNode atom_expr() {
        SyntaxNode n = atom();
        for (;;) {
            if (accept_op("(")) {
                SyntaxNode call = node("Call", {std::move(n)});
                while (!at_op(")")) {
                    call.children.push_back(argument());
                    if (!accept_op(",")) break;
                }
                expect_op(")");
                n = std::move(call);
            } else if (accept_op("[")) {
                SyntaxNode sub = node("Subscript", {std::move(n), subscriptlist()});
                expect_op("]");
                n = std::move(sub);
            } else if (accept_op(".")) {
                n = node("Attribute", {std::move(n), name_leaf("Attr")});
            } else {
                return n;
            }
        }
    }

    SyntaxNode argument() {
        if (accept_op("*")) return node("Starred", {test()});
        if (accept_op("**")) return node("DoubleStarred", {test()});
        if (at(RawKind::Name) && !is_python_keyword(peek().text) && at_op("=", 1)) {
            SyntaxNode name = name_leaf("ArgName");
            ++pos_;  // '='
            return node("Keyword", {std::move(name), test()});
        }
        SyntaxNode t = namedexpr_test();
        if (at_kw("for") || (at_kw("async") && at_kw("for", 1))) {
            SyntaxNode g = node("GeneratorExp", {std::move(t)});
            comp_for(g.children);
            return g;
        }
        return t;
    }

    SyntaxNode subscriptlist() {
        SyntaxNode first = subscript();
        if (!at_op(",")) return first;
        SyntaxNode tup = node("Tuple", {std::move(first)});
        while (accept_op(",")) {
            if (at_op("]")) break;
            tup.children.push_back(subscript());
        }
        return tup;
    }

    SyntaxNode subscript() {
        if (at_op("*")) return star_expr();
        std::optional<SyntaxNode> lower;
        if (!at_op(":")) {
            lower = namedexpr_test();
            if (!at_op(":")) return std::move(*lower);
        }
        expect_op(":");
        SyntaxNode s = node("Slice");
        s.children.push_back(lower ? node("Lower", {std::move(*lower)}) : node("Lower"));
        if (!at_op("]") && !at_op(",") && !at_op(":")) s.children.push_back(node("Upper", {test()}));
        if (accept_op(":") && !at_op("]") && !at_op(",")) {
            s.children.push_back(node("Step", {test()}));
        }
        return s;
    }

    void comp_for(std::vector<SyntaxNode>& out) {
        while (at_kw("for") || (at_kw("async") && at_kw("for", 1))) {
            accept_kw("async");
            expect_kw("for");
            SyntaxNode target = exprlist();
            expect_kw("in");
            SyntaxNode c = node("Comprehension", {std::move(target), or_test()});
            while (at_kw("if")) {
                ++pos_;
                c.children.push_back(node("CompIf", {or_test()}));
            }
            out.push_back(std::move(c));
        }
    }

    SyntaxNode atom() {
        const RawToken& t = peek();
        switch (t.kind) {
            case RawKind::Number: ++pos_; return leaf("Num", t);
            case RawKind::String: {
                SyntaxNode s = leaf("Str", t);
                ++pos_;
                while (at(RawKind::String)) s.text += toks_[pos_++].text;
                return s;
            }
            case RawKind::Name:
                if (t.text == "None" || t.text == "True" || t.text == "False") {
                    ++pos_;
                    return leaf("Const", t);
                }
                if (t.text == "yield") return yield_expr();
                if (is_python_keyword(t.text)) fail("unexpected keyword '" + t.text + "'");
                ++pos_;
                return leaf("Name", t);
            case RawKind::Op:
                if (t.text == "...") {
                    ++pos_;
                    return leaf("Const", t);
                }
                if (t.text == "(") return paren_atom();
                if (t.text == "[") return list_atom();
                if (t.text == "{") return brace_atom();
                break;
            default: break;
        }
        fail("unexpected token");
    }

    SyntaxNode paren_atom() {
        expect_op("(");
        if (accept_op(")")) return node("Tuple");
        if (at_kw("yield")) {
            SyntaxNode y = yield_expr();
            expect_op(")");
            return y;
        }
        SyntaxNode first = at_op("*") ? star_expr() : namedexpr_test();
        if (at_kw("for") || (at_kw("async") && at_kw("for", 1))) {
            SyntaxNode g = node("GeneratorExp", {std::move(first)});
            comp_for(g.children);
            expect_op(")");
            return g;
        }
        if (!at_op(",")) {
            expect_op(")");
            return first;
        }
        SyntaxNode tup = node("Tuple", {std::move(first)});
        while (accept_op(",")) {
            if (at_op(")")) break;
            tup.children.push_back(at_op("*") ? star_expr() : namedexpr_test());
        }
        expect_op(")");
        return tup;
    }

    SyntaxNode list_atom() {
        expect_op("[");
        if (accept_op("]")) return node("List");
        SyntaxNode first = at_op("*") ? star_expr() : namedexpr_test();
        if (at_kw("for") || (at_kw("async") && at_kw("for", 1))) {
            SyntaxNode c = node("ListComp", {std::move(first)});
            comp_for(c.children);
            expect_op("]");
            return c;
        }
        SyntaxNode list = node("List", {std::move(first)});
        while (accept_op(",")) {
            if (at_op("]")) break;
            list.children.push_back(at_op("*") ? star_expr() : namedexpr_test());
        }
        expect_op("]");
        return list;
    }

    SyntaxNode brace_atom() {
        expect_op("{");
        if (accept_op("}")) return node("Dict");
        auto dict_item = [&]() -> SyntaxNode {
            if (accept_op("**")) return node("DoubleStarred", {expr()});
            SyntaxNode k = test();
            expect_op(":");
            return node("KeyValue", {std::move(k), test()});
        };
        // Dict if the first element is `**x` or `k: v`.
        bool is_dict = at_op("**");
        std::optional<SyntaxNode> first;
        if (!is_dict) {
            first = at_op("*") ? star_expr() : test();
            is_dict = at_op(":");
        }
        if (is_dict) {
            SyntaxNode item = first ? [&] {
                expect_op(":");
                return node("KeyValue", {std::move(*first), test()});
            }()
                                    : dict_item();
            if (at_kw("for") || (at_kw("async") && at_kw("for", 1))) {
                SyntaxNode c = node("DictComp", {std::move(item)});
                comp_for(c.children);
                expect_op("}");
                return c;
            }
            SyntaxNode d = node("Dict", {std::move(item)});
            while (accept_op(",")) {
                if (at_op("}")) break;
                d.children.push_back(dict_item());
            }
            expect_op("}");
            return d;
        }
        if (at_kw("for") || (at_kw("async") && at_kw("for", 1))) {
            SyntaxNode c = node("SetComp", {std::move(*first)});
            comp_for(c.children);
            expect_op("}");
            return c;
        }
        SyntaxNode s = node("Set", {std::move(*first)});
        while (accept_op(",")) {
            if (at_op("}")) break;
            s.children.push_back(at_op("*") ? star_expr() : test());
        }
        expect_op("}");
        return s;
    }

    std::vector<RawToken> toks_;
    std::size_t pos_ = 0;
};

}  // namespace detail

/// Outcome of a parse: a tree, or the offset and reason of the failure.
struct ParseResult {
    std::optional<SyntaxNode> tree;
    std::size_t error_offset = 0;
    std::string error;

    explicit operator bool() const noexcept { return tree.has_value(); }
};

/// Parses a Python snippet. Reentrant; the parser holds no shared state, so
/// each worker may simply call this function.
inline ParseResult parse_python(std::string_view code) {
    try {
        return ParseResult{detail::Parser(lex(code)).parse_module(), 0, {}};
    } catch (const detail::SyntaxFailure& f) {
        return ParseResult{std::nullopt, f.offset, f.what};
    }
}

/// Preorder kind signature: "Kind" for leaves, "(Kind child ...)" otherwise.
inline std::string signature(const SyntaxNode& n) {
    if (n.is_leaf()) return n.kind;
    std::string s = "(" + n.kind;
    for (const auto& c : n.children) {
        s += ' ';
        s += signature(c);
    }
    s += ')';
    return s;
}

namespace detail {

inline std::string collect_subtrees(const SyntaxNode& n, std::map<std::string, std::size_t>& out) {
    if (n.is_leaf()) return n.kind;
    std::string s = "(" + n.kind;
    for (const auto& c : n.children) {
        s += ' ';
        s += collect_subtrees(c, out);
    }
    s += ')';
    ++out[s];
    return s;
}

}  // namespace detail

/// Multiset of signatures of every subtree rooted at an interior node.
inline std::map<std::string, std::size_t> subtree_signatures(const SyntaxNode& root) {
    std::map<std::string, std::size_t> out;
    detail::collect_subtrees(root, out);
    return out;
}

/// Fraction of the reference's interior subtrees that also occur in the
/// candidate (multiset, clipped). Empty when the reference has no interior
/// nodes.
inline std::optional<double> syntax_match(const SyntaxNode& candidate, const SyntaxNode& reference) {
    const auto cand = subtree_signatures(candidate);
    const auto ref = subtree_signatures(reference);
    std::size_t total = 0;
    std::size_t matched = 0;
    for (const auto& [sig, count] : ref) {
        total += count;
        auto it = cand.find(sig);
        if (it != cand.end()) matched += std::min(count, it->second);
    }
    if (total == 0) return std::nullopt;
    return static_cast<double>(matched) / static_cast<double>(total);
}

}  // namespace t2j::codebleu
