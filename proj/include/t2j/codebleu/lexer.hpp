// Copyright (c) 2026, T2J harness contributors
// SPDX-License-Identifier: Apache-2.0
//
// Python lexer. lex() produces the full token sequence including layout
// tokens (NEWLINE / INDENT / DEDENT) for the parser; tokenize() produces the
// lexical TokenStream used by the n-gram components.

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace t2j::codebleu {

enum class TokenClass { Keyword, Identifier, Literal, Operator, Other };

inline std::string_view to_string(TokenClass c) {
    switch (c) {
        case TokenClass::Keyword: return "keyword";
        case TokenClass::Identifier: return "identifier";
        case TokenClass::Literal: return "literal";
        case TokenClass::Operator: return "operator";
        case TokenClass::Other: return "other";
    }
    return "other";
}

struct Token {
    std::string text;
    TokenClass cls = TokenClass::Other;

    bool operator==(const Token&) const = default;
};

using TokenStream = std::vector<Token>;

inline bool is_python_keyword(std::string_view s) {
    static constexpr std::array<std::string_view, 35> kKeywords = {
        "False", "None",   "True",    "and",      "as",       "assert", "async",
        "await", "break",  "class",   "continue", "def",      "del",    "elif",
        "else",  "except", "finally", "for",      "from",     "global", "if",
        "import", "in",    "is",      "lambda",   "nonlocal", "not",    "or",
        "pass",  "raise",  "return",  "try",      "while",    "with",   "yield",
    };
    return std::find(kKeywords.begin(), kKeywords.end(), s) != kKeywords.end();
}

enum class RawKind { Name, Number, String, Op, Newline, Indent, Dedent, EndMarker, Error };

struct RawToken {
    RawKind kind;
    std::string text;
    std::size_t offset;  // byte offset into the source
};

namespace detail {

inline bool is_ident_start(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c >= 0x80;
}
inline bool is_ident_char(unsigned char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
inline bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

inline bool is_string_prefix(std::string_view s) {
    if (s.empty() || s.size() > 2) return false;
    std::string lower;
    for (char c : s) lower.push_back(static_cast<char>(c | 0x20));
    return lower == "r" || lower == "u" || lower == "b" || lower == "f" || lower == "br" ||
           lower == "rb" || lower == "fr" || lower == "rf";
}

// Longest operators first.
inline constexpr std::array<std::string_view, 48> kOperators = {
    "**=", "//=", ">>=", "<<=", "...", "!=", "%=", "&=", "**", "*=", "+=", "-=",
    "->",  "//",  "/=",  ":=",  "<<",  "<=", "==", ">=", ">>", "@=", "^=", "|=",
    "%",   "&",   "(",   ")",   "*",   "+",  ",",  "-",  ".",  "/",  ":",  ";",
    "<",   "=",   ">",   "@",   "[",   "]",  "^",  "{",  "|",  "}",  "~",  "!",
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<RawToken> run() {
        std::vector<std::size_t> indents{0};
        bool at_line_start = true;
        int depth = 0;
        while (pos_ < src_.size()) {
            if (at_line_start && depth == 0) {
                std::size_t col = 0;
                std::size_t p = pos_;
                while (p < src_.size() && (src_[p] == ' ' || src_[p] == '\t' || src_[p] == '\f')) {
                    col = src_[p] == '\t' ? (col / 8 + 1) * 8 : (src_[p] == ' ' ? col + 1 : 0);
                    ++p;
                }
                if (p >= src_.size()) {
                    pos_ = p;
                    break;
                }
                if (src_[p] == '\n' || src_[p] == '\r' || src_[p] == '#') {
                    pos_ = p;
                    skip_to_eol();
                    continue;
                }
                pos_ = p;
                at_line_start = false;
                if (col > indents.back()) {
                    indents.push_back(col);
                    emit(RawKind::Indent, "", pos_);
                } else {
                    while (col < indents.back()) {
                        indents.pop_back();
                        emit(RawKind::Dedent, "", pos_);
                    }
                    if (col != indents.back()) emit(RawKind::Error, "<dedent>", pos_);
                }
            }
            const unsigned char c = static_cast<unsigned char>(src_[pos_]);
            if (c == ' ' || c == '\t' || c == '\f') {
                ++pos_;
            } else if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n' && src_[pos_] != '\r') ++pos_;
            } else if (c == '\\' && pos_ + 1 < src_.size() &&
                       (src_[pos_ + 1] == '\n' || src_[pos_ + 1] == '\r')) {
                pos_ += 1;
                consume_newline();
            } else if (c == '\n' || c == '\r') {
                if (depth == 0) {
                    if (!out_.empty() && out_.back().kind != RawKind::Newline &&
                        out_.back().kind != RawKind::Indent && out_.back().kind != RawKind::Dedent) {
                        emit(RawKind::Newline, "", pos_);
                    }
                    at_line_start = true;
                }
                consume_newline();
            } else if (is_ident_start(c)) {
                const std::size_t start = pos_;
                while (pos_ < src_.size() && is_ident_char(static_cast<unsigned char>(src_[pos_]))) {
                    ++pos_;
                }
                std::string_view word = src_.substr(start, pos_ - start);
                if (pos_ < src_.size() && (src_[pos_] == '"' || src_[pos_] == '\'') &&
                    is_string_prefix(word)) {
                    lex_string(start);
                } else {
                    emit(RawKind::Name, std::string(word), start);
                }
            } else if (is_digit(c) ||
                       (c == '.' && pos_ + 1 < src_.size() &&
                        is_digit(static_cast<unsigned char>(src_[pos_ + 1])))) {
                lex_number();
            } else if (c == '"' || c == '\'') {
                lex_string(pos_);
            } else {
                bool matched = false;
                for (auto op : kOperators) {
                    if (src_.compare(pos_, op.size(), op) == 0) {
                        if (op == "(" || op == "[" || op == "{") ++depth;
                        if ((op == ")" || op == "]" || op == "}") && depth > 0) --depth;
                        emit(op == "!" ? RawKind::Error : RawKind::Op, std::string(op), pos_);
                        pos_ += op.size();
                        matched = true;
                        break;
                    }
                }
                if (!matched) {
                    emit(RawKind::Error, std::string(1, static_cast<char>(c)), pos_);
                    ++pos_;
                }
            }
        }
        if (!out_.empty() && out_.back().kind != RawKind::Newline &&
            out_.back().kind != RawKind::Dedent && out_.back().kind != RawKind::Indent) {
            emit(RawKind::Newline, "", src_.size());
        }
        while (indents.size() > 1) {
            indents.pop_back();
            emit(RawKind::Dedent, "", src_.size());
        }
        emit(RawKind::EndMarker, "", src_.size());
        return std::move(out_);
    }

private:
    void emit(RawKind k, std::string text, std::size_t offset) {
        out_.push_back(RawToken{k, std::move(text), offset});
    }

    void consume_newline() {
        if (pos_ < src_.size() && src_[pos_] == '\r') ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '\n') ++pos_;
    }

    void skip_to_eol() {
        while (pos_ < src_.size() && src_[pos_] != '\n' && src_[pos_] != '\r') ++pos_;
        consume_newline();
    }

    void lex_number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < src_.size() &&
                   (is_digit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
                ++pos_;
            }
        };
        if (src_[pos_] == '0' && pos_ + 1 < src_.size() &&
            std::string_view("xXoObB").find(src_[pos_ + 1]) != std::string_view::npos) {
            pos_ += 2;
            while (pos_ < src_.size() && is_ident_char(static_cast<unsigned char>(src_[pos_]))) {
                ++pos_;
            }
        } else {
            digits();
            if (pos_ < src_.size() && src_[pos_] == '.') {
                ++pos_;
                digits();
            }
            if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
                std::size_t p = pos_ + 1;
                if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
                if (p < src_.size() && is_digit(static_cast<unsigned char>(src_[p]))) {
                    pos_ = p;
                    digits();
                }
            }
            if (pos_ < src_.size() && (src_[pos_] == 'j' || src_[pos_] == 'J')) ++pos_;
        }
        emit(RawKind::Number, std::string(src_.substr(start, pos_ - start)), start);
    }

    // `start` is the beginning of the prefix (or the quote when unprefixed);
    // pos_ is at the opening quote.
    void lex_string(std::size_t start) {
        const char quote = src_[pos_];
        const bool triple = src_.compare(pos_, 3, std::string(3, quote)) == 0;
        pos_ += triple ? 3 : 1;
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '\\') {
                pos_ += 2;
                continue;
            }
            if (triple) {
                if (src_.compare(pos_, 3, std::string(3, quote)) == 0) {
                    pos_ += 3;
                    emit(RawKind::String, std::string(src_.substr(start, pos_ - start)), start);
                    return;
                }
            } else {
                if (c == quote) {
                    ++pos_;
                    emit(RawKind::String, std::string(src_.substr(start, pos_ - start)), start);
                    return;
                }
                if (c == '\n' || c == '\r') break;
            }
            ++pos_;
        }
        pos_ = std::min(pos_, src_.size());
        emit(RawKind::Error, std::string(src_.substr(start, pos_ - start)), start);
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::vector<RawToken> out_;
};

}  // namespace detail

/// Full token sequence with layout tokens; never fails. Unlexable input
/// yields RawKind::Error tokens.
inline std::vector<RawToken> lex(std::string_view code) { return detail::Lexer(code).run(); }

/// Lexical tokens only (no layout, no comments), each tagged with its class.
inline TokenStream tokenize(std::string_view code) {
    TokenStream out;
    for (auto& t : lex(code)) {
        switch (t.kind) {
            case RawKind::Name:
                out.push_back({t.text, is_python_keyword(t.text) ? TokenClass::Keyword
                                                                 : TokenClass::Identifier});
                break;
            case RawKind::Number:
            case RawKind::String: out.push_back({t.text, TokenClass::Literal}); break;
            case RawKind::Op: out.push_back({t.text, TokenClass::Operator}); break;
            case RawKind::Error:
                if (t.text != "<dedent>") out.push_back({t.text, TokenClass::Other});
                break;
            default: break;
        }
    }
    return out;
}

}  // namespace t2j::codebleu
