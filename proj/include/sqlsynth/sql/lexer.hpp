// Copyright 2026 The sqlsynth Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace sqlsynth::sql {

// Lexical analysis is total: any input maps to a token sequence. Keywords and
// identifiers are lowercased, literals are kept verbatim (including quotes),
// punctuation and operators come out as individual tokens.

enum class TokenKind {
    Identifier,   // lowercased bare or quoted identifier
    Number,       // numeric literal, verbatim
    String,       // 'quoted' literal, verbatim with quotes
    Operator,     // punctuation or operator, possibly multi-char (<=, <>, ||)
    End,
};

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;
    std::size_t offset = 0;  // byte offset into the source
};

namespace detail {

inline bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

inline bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

inline std::string to_lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

}  // namespace detail

/// Full tokenization with offsets; never throws.
inline std::vector<Token> lex(std::string_view sql) {
    std::vector<Token> out;
    std::size_t i = 0;
    const std::size_t n = sql.size();
    while (i < n) {
        char c = sql[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        // -- line comment
        if (c == '-' && i + 1 < n && sql[i + 1] == '-') {
            while (i < n && sql[i] != '\n') ++i;
            continue;
        }
        // /* block comment */
        if (c == '/' && i + 1 < n && sql[i + 1] == '*') {
            i += 2;
            while (i + 1 < n && !(sql[i] == '*' && sql[i + 1] == '/')) ++i;
            i = (i + 1 < n) ? i + 2 : n;
            continue;
        }
        std::size_t start = i;
        if (detail::is_ident_start(c)) {
            while (i < n && detail::is_ident_char(sql[i])) ++i;
            out.push_back({TokenKind::Identifier,
                           detail::to_lower(sql.substr(start, i - start)), start});
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(sql[i + 1])))) {
            while (i < n && (std::isdigit(static_cast<unsigned char>(sql[i])) || sql[i] == '.')) ++i;
            // exponent part: 1e5, 2.5E-3
            if (i < n && (sql[i] == 'e' || sql[i] == 'E')) {
                std::size_t j = i + 1;
                if (j < n && (sql[j] == '+' || sql[j] == '-')) ++j;
                if (j < n && std::isdigit(static_cast<unsigned char>(sql[j]))) {
                    i = j;
                    while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
                }
            }
            out.push_back({TokenKind::Number, std::string(sql.substr(start, i - start)), start});
            continue;
        }
        if (c == '\'') {
            ++i;
            while (i < n) {
                if (sql[i] == '\'') {
                    if (i + 1 < n && sql[i + 1] == '\'') { i += 2; continue; }  // '' escape
                    ++i;
                    break;
                }
                ++i;
            }
            out.push_back({TokenKind::String, std::string(sql.substr(start, i - start)), start});
            continue;
        }
        if (c == '"' || c == '`' || c == '[') {
            // quoted identifier; normalized to lowercase without quotes
            char close = (c == '[') ? ']' : c;
            ++i;
            std::size_t body = i;
            while (i < n && sql[i] != close) ++i;
            std::string name = detail::to_lower(sql.substr(body, i - body));
            if (i < n) ++i;
            out.push_back({TokenKind::Identifier, name, start});
            continue;
        }
        // multi-char operators first
        static constexpr std::string_view two_char[] = {"<=", ">=", "<>", "!=", "||"};
        bool matched = false;
        if (i + 1 < n) {
            std::string_view pair = sql.substr(i, 2);
            for (std::string_view op : two_char) {
                if (pair == op) {
                    out.push_back({TokenKind::Operator, std::string(op), start});
                    i += 2;
                    matched = true;
                    break;
                }
            }
        }
        if (matched) continue;
        out.push_back({TokenKind::Operator, std::string(1, c), start});
        ++i;
    }
    return out;
}

/// Token texts only — the form consumed by token-level similarity.
inline std::vector<std::string> tokenize(std::string_view sql) {
    std::vector<std::string> out;
    for (const Token& t : lex(sql)) out.push_back(t.text);
    return out;
}

/// Space-join a token sequence back into text.
inline std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

}  // namespace sqlsynth::sql
