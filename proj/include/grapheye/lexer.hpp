#pragma once

#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "grapheye/errors.hpp"

namespace grapheye {

struct Token {
    enum class Kind {
        Keyword,
        Identifier,
        IntegerLiteral,
        FloatLiteral,
        CharLiteral,
        StringLiteral,
        Operator,
        Punctuation,
    };
    Kind kind = Kind::Identifier;
    std::string text;
    int line = 1;
    int col = 1;

    bool is(Kind k, std::string_view t) const { return kind == k && text == t; }
    bool is_kw(std::string_view t) const { return is(Kind::Keyword, t); }
    bool is_op(std::string_view t) const { return is(Kind::Operator, t); }
    bool is_punct(std::string_view t) const { return is(Kind::Punctuation, t); }
};

namespace detail {

inline const std::unordered_set<std::string>& keywords() {
    static const std::unordered_set<std::string> kw = {
        "char", "int", "short", "float", "double", "long", "string", "void",
        "struct", "union", "signed", "unsigned", "const", "static", "inline",
        "if", "else", "while", "for", "switch", "case", "default", "goto",
        "return", "break", "continue", "sizeof", "new", "delete", "do",
        "typedef", "enum", "volatile", "register", "extern",
    };
    return kw;
}

// Multi-character operators, longest first for maximal munch.
inline const std::vector<std::string>& multi_char_operators() {
    static const std::vector<std::string> ops = {
        "<<=", ">>=", "...",
        "::", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=",
        "&&", "||", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
    };
    return ops;
}

}  // namespace detail

/// Splits C source into tokens; // and /* */ comments and whitespace are
/// skipped. Throws LexError on unterminated strings/comments and on bytes
/// outside the token alphabet.
inline std::vector<Token> tokenize(const std::string& source) {
    std::vector<Token> out;
    size_t i = 0, n = source.size();
    int line = 1, col = 1;

    auto advance = [&](size_t count) {
        for (size_t k = 0; k < count && i < n; ++k, ++i) {
            if (source[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    auto peek = [&](size_t off = 0) -> char {
        return i + off < n ? source[i + off] : '\0';
    };

    while (i < n) {
        char c = source[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f') {
            advance(1);
            continue;
        }
        if (c == '/' && peek(1) == '/') {
            while (i < n && source[i] != '\n') advance(1);
            continue;
        }
        if (c == '/' && peek(1) == '*') {
            int sl = line, sc = col;
            advance(2);
            bool closed = false;
            while (i < n) {
                if (source[i] == '*' && peek(1) == '/') {
                    advance(2);
                    closed = true;
                    break;
                }
                advance(1);
            }
            if (!closed) throw LexError(sl, sc, "unterminated block comment");
            continue;
        }
        // Preprocessor lines are skipped whole; no expansion.
        if (c == '#') {
            while (i < n && source[i] != '\n') {
                if (source[i] == '\\' && peek(1) == '\n') advance(1);
                advance(1);
            }
            continue;
        }

        Token tok;
        tok.line = line;
        tok.col = col;
        size_t start = i;

        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < n && (std::isalnum(static_cast<unsigned char>(source[i])) || source[i] == '_'))
                advance(1);
            tok.text = source.substr(start, i - start);
            tok.kind = detail::keywords().count(tok.text) ? Token::Kind::Keyword
                                                          : Token::Kind::Identifier;
            out.push_back(std::move(tok));
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
            bool is_float = false;
            bool is_hex = c == '0' && (peek(1) == 'x' || peek(1) == 'X');
            if (is_hex) advance(2);
            auto digit_ok = [&](char d) {
                if (is_hex) return std::isxdigit(static_cast<unsigned char>(d)) != 0;
                return std::isdigit(static_cast<unsigned char>(d)) != 0;
            };
            while (i < n && digit_ok(source[i])) advance(1);
            if (!is_hex && peek() == '.') {
                is_float = true;
                advance(1);
                while (i < n && std::isdigit(static_cast<unsigned char>(source[i]))) advance(1);
            }
            if (!is_hex && (peek() == 'e' || peek() == 'E')) {
                is_float = true;
                advance(1);
                if (peek() == '+' || peek() == '-') advance(1);
                while (i < n && std::isdigit(static_cast<unsigned char>(source[i]))) advance(1);
            }
            if (peek() == 'f' || peek() == 'F') {
                is_float = true;
                advance(1);
            }
            while (peek() == 'u' || peek() == 'U' || peek() == 'l' || peek() == 'L') advance(1);
            tok.text = source.substr(start, i - start);
            tok.kind = is_float ? Token::Kind::FloatLiteral : Token::Kind::IntegerLiteral;
            out.push_back(std::move(tok));
            continue;
        }
        if (c == '"' || c == '\'') {
            char quote = c;
            int sl = line, sc = col;
            advance(1);
            bool closed = false;
            while (i < n) {
                if (source[i] == '\\' && i + 1 < n) {
                    advance(2);
                    continue;
                }
                if (source[i] == quote) {
                    advance(1);
                    closed = true;
                    break;
                }
                if (source[i] == '\n') break;
                advance(1);
            }
            if (!closed)
                throw LexError(sl, sc, quote == '"' ? "unterminated string literal"
                                                    : "unterminated character literal");
            tok.text = source.substr(start, i - start);
            tok.kind = quote == '"' ? Token::Kind::StringLiteral : Token::Kind::CharLiteral;
            out.push_back(std::move(tok));
            continue;
        }

        bool matched = false;
        for (const auto& op : detail::multi_char_operators()) {
            if (source.compare(i, op.size(), op) == 0) {
                tok.kind = Token::Kind::Operator;
                tok.text = op;
                advance(op.size());
                out.push_back(std::move(tok));
                matched = true;
                break;
            }
        }
        if (matched) continue;

        static const std::string single_ops = "+-*/%=<>&|^!~?.";
        static const std::string puncts = "(){}[];,:";
        if (single_ops.find(c) != std::string::npos) {
            tok.kind = Token::Kind::Operator;
            tok.text = std::string(1, c);
            advance(1);
            out.push_back(std::move(tok));
            continue;
        }
        if (puncts.find(c) != std::string::npos) {
            tok.kind = Token::Kind::Punctuation;
            tok.text = std::string(1, c);
            advance(1);
            out.push_back(std::move(tok));
            continue;
        }
        throw LexError(line, col, std::string("illegal character '") + c + "'");
    }
    return out;
}

}  // namespace grapheye
