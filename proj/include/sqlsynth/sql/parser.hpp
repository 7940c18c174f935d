// Copyright 2026 The sqlsynth Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "sqlsynth/error.hpp"
#include "sqlsynth/sql/ast.hpp"
#include "sqlsynth/sql/lexer.hpp"

namespace sqlsynth::sql {

// Recursive-descent parser for the SELECT dialect accepted by the execution
// harness (SQLite-compatible). Produces normalized ASTs: lowercased
// identifiers, literal values collapsed to class tags. Exactly one statement
// per input; anything after an optional trailing semicolon is rejected.

namespace detail {

inline const std::unordered_set<std::string>& clause_keywords() {
    static const std::unordered_set<std::string> kw = {
        "where", "group", "having", "order", "limit", "offset", "on", "using",
        "join", "inner", "left", "right", "full", "outer", "cross", "natural",
        "union", "intersect", "except", "as", "when", "then", "else", "end",
        "and", "or", "not", "between", "in", "like", "glob", "is", "exists",
        "case", "cast", "select", "from", "distinct", "all", "by", "asc",
        "desc", "nulls", "partition", "over", "with", "recursive", "escape",
        "values", "set", "collate",
    };
    return kw;
}

inline bool looks_like_date(std::string_view body) {
    auto digits = [&](std::size_t at, std::size_t count) {
        if (at + count > body.size()) return false;
        for (std::size_t i = 0; i < count; ++i)
            if (!std::isdigit(static_cast<unsigned char>(body[at + i]))) return false;
        return true;
    };
    // YYYY-MM-DD with optional " HH:MM[:SS]" / "THH:MM[:SS]" tail
    if (!(digits(0, 4) && body.size() >= 10 && body[4] == '-' && digits(5, 2) &&
          body[7] == '-' && digits(8, 2)))
        return false;
    if (body.size() == 10) return true;
    if (body.size() < 16 || (body[10] != ' ' && body[10] != 'T')) return false;
    if (!(digits(11, 2) && body[13] == ':' && digits(14, 2))) return false;
    if (body.size() == 16) return true;
    return body.size() == 19 && body[16] == ':' && digits(17, 2);
}

class Parser {
public:
    explicit Parser(std::string_view sql) : tokens_(lex(sql)) {}

    QueryAst parse_single_statement() {
        if (tokens_.empty()) throw ParseError("empty statement", 0);
        QueryAst ast;
        ast.source_token_count = tokens_.size();
        ast.root = parse_statement();
        while (at_op(";")) advance();
        if (!at_end()) {
            if (peek().text == "select" || peek().text == "with")
                throw ParseError("multiple statements", peek().offset);
            throw ParseError("trailing input after statement", peek().offset);
        }
        return ast;
    }

private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;

    // ── token helpers ────────────────────────────────────────────

    const Token& peek(std::size_t ahead = 0) const {
        static const Token end_token{TokenKind::End, "", 0};
        return pos_ + ahead < tokens_.size() ? tokens_[pos_ + ahead] : end_token;
    }
    bool at_end() const { return pos_ >= tokens_.size(); }
    void advance() { ++pos_; }

    bool at_kw(std::string_view kw, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == TokenKind::Identifier && t.text == kw;
    }
    bool at_op(std::string_view op, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == TokenKind::Operator && t.text == op;
    }
    bool accept_kw(std::string_view kw) {
        if (!at_kw(kw)) return false;
        advance();
        return true;
    }
    bool accept_op(std::string_view op) {
        if (!at_op(op)) return false;
        advance();
        return true;
    }
    void expect_kw(std::string_view kw) {
        if (!accept_kw(kw))
            throw ParseError("expected '" + std::string(kw) + "'", peek().offset);
    }
    void expect_op(std::string_view op) {
        if (!accept_op(op))
            throw ParseError("expected '" + std::string(op) + "'", peek().offset);
    }
    std::string expect_identifier(const char* what) {
        const Token& t = peek();
        if (t.kind != TokenKind::Identifier)
            throw ParseError(std::string("expected ") + what, t.offset);
        std::string name = t.text;
        advance();
        return name;
    }

    // ── statements ───────────────────────────────────────────────

    AstNode parse_statement() {
        if (at_kw("with")) return parse_with();
        return parse_select_body();
    }

    AstNode parse_with() {
        expect_kw("with");
        AstNode with(AstKind::With);
        if (accept_kw("recursive")) with.payload = "recursive";
        while (true) {
            with.children.push_back(parse_cte());
            if (!accept_op(",")) break;
        }
        with.children.push_back(parse_select_body());
        return with;
    }

    AstNode parse_cte() {
        AstNode cte(AstKind::Cte, expect_identifier("CTE name"));
        if (at_op("(")) {
            advance();
            AstNode cols(AstKind::ColumnList);
            while (true) {
                cols.children.emplace_back(AstKind::ColumnRef, expect_identifier("column name"));
                if (!accept_op(",")) break;
            }
            expect_op(")");
            cte.children.push_back(std::move(cols));
        }
        expect_kw("as");
        expect_op("(");
        cte.children.push_back(parse_statement());
        expect_op(")");
        return cte;
    }

    /// compound select with optional trailing ORDER BY / LIMIT.
    AstNode parse_select_body() {
        AstNode node = parse_compound_operand();
        while (at_kw("union") || at_kw("intersect") || at_kw("except")) {
            std::string op = peek().text;
            advance();
            if (op == "union" && accept_kw("all")) op = "union all";
            AstNode rhs = parse_compound_operand();
            node = AstNode(AstKind::Compound, op, {std::move(node), std::move(rhs)});
        }
        if (at_kw("order")) node.children.push_back(parse_order_by());
        if (at_kw("limit")) {
            auto [limit, offset] = parse_limit();
            node.children.push_back(std::move(limit));
            if (offset.kind == AstKind::Offset) node.children.push_back(std::move(offset));
        }
        return node;
    }

    AstNode parse_compound_operand() {
        if (at_op("(") && (at_kw("select", 1) || at_kw("with", 1))) {
            advance();
            AstNode inner = parse_statement();
            expect_op(")");
            return inner;
        }
        return parse_select_core();
    }

    AstNode parse_select_core() {
        expect_kw("select");
        AstNode select(AstKind::Select);
        if (accept_kw("distinct")) select.payload = "distinct";
        else accept_kw("all");

        AstNode list(AstKind::SelectList);
        while (true) {
            list.children.push_back(parse_select_item());
            if (!accept_op(",")) break;
        }
        select.children.push_back(std::move(list));

        if (accept_kw("from")) {
            AstNode from(AstKind::From);
            from.children.push_back(parse_join_tree());
            select.children.push_back(std::move(from));
        }
        if (accept_kw("where")) {
            AstNode where(AstKind::Where);
            where.children.push_back(parse_expr());
            select.children.push_back(std::move(where));
        }
        if (at_kw("group")) {
            advance();
            expect_kw("by");
            AstNode group(AstKind::GroupBy);
            while (true) {
                group.children.push_back(parse_expr());
                if (!accept_op(",")) break;
            }
            select.children.push_back(std::move(group));
        }
        if (accept_kw("having")) {
            AstNode having(AstKind::Having);
            having.children.push_back(parse_expr());
            select.children.push_back(std::move(having));
        }
        return select;
    }

    AstNode parse_select_item() {
        if (at_op("*")) {
            advance();
            return AstNode(AstKind::SelectItem, "", {AstNode(AstKind::Star)});
        }
        AstNode item(AstKind::SelectItem);
        AstNode expr = parse_expr();
        if (expr.kind == AstKind::Star) return AstNode(AstKind::SelectItem, "", {std::move(expr)});
        if (accept_kw("as")) {
            item.payload = expect_identifier("alias");
        } else if (peek().kind == TokenKind::Identifier &&
                   !clause_keywords().count(peek().text)) {
            item.payload = peek().text;
            advance();
        }
        item.children.push_back(std::move(expr));
        return item;
    }

    // ── FROM clause ─────────────────────────────────────────────

    AstNode parse_join_tree() {
        AstNode left = parse_table_or_subquery();
        while (true) {
            std::string join_type;
            if (accept_op(",")) {
                join_type = "comma";
            } else if (at_kw("join") || at_kw("inner") || at_kw("left") || at_kw("right") ||
                       at_kw("full") || at_kw("cross")) {
                if (accept_kw("join")) join_type = "inner";
                else {
                    join_type = peek().text;
                    advance();
                    accept_kw("outer");
                    expect_kw("join");
                }
            } else {
                break;
            }
            AstNode right = parse_table_or_subquery();
            AstNode join(AstKind::Join, join_type, {std::move(left), std::move(right)});
            if (accept_kw("on")) {
                AstNode on(AstKind::On);
                on.children.push_back(parse_expr());
                join.children.push_back(std::move(on));
            } else if (accept_kw("using")) {
                expect_op("(");
                AstNode using_node(AstKind::Using);
                while (true) {
                    using_node.children.emplace_back(AstKind::ColumnRef,
                                                     expect_identifier("column name"));
                    if (!accept_op(",")) break;
                }
                expect_op(")");
                join.children.push_back(std::move(using_node));
            }
            left = std::move(join);
        }
        return left;
    }

    AstNode parse_table_or_subquery() {
        if (at_op("(")) {
            if (at_kw("select", 1) || at_kw("with", 1)) {
                advance();
                AstNode stmt = parse_statement();
                expect_op(")");
                AstNode sub(AstKind::SubqueryTable);
                sub.children.push_back(std::move(stmt));
                attach_alias(sub);
                return sub;
            }
            advance();  // parenthesized join
            AstNode inner = parse_join_tree();
            expect_op(")");
            return inner;
        }
        AstNode table(AstKind::TableRef, expect_identifier("table name"));
        attach_alias(table);
        return table;
    }

    void attach_alias(AstNode& node) {
        if (accept_kw("as")) {
            node.children.emplace_back(AstKind::Alias, expect_identifier("alias"));
        } else if (peek().kind == TokenKind::Identifier &&
                   !clause_keywords().count(peek().text)) {
            node.children.emplace_back(AstKind::Alias, peek().text);
            advance();
        }
    }

    // ── ORDER BY / LIMIT ────────────────────────────────────────

    AstNode parse_order_by() {
        expect_kw("order");
        expect_kw("by");
        AstNode order(AstKind::OrderBy);
        while (true) {
            AstNode item(AstKind::OrderItem, "asc");
            item.children.push_back(parse_expr());
            if (accept_kw("desc")) item.payload = "desc";
            else accept_kw("asc");
            if (accept_kw("nulls")) {
                if (accept_kw("first")) item.payload += ":nulls first";
                else {
                    expect_kw("last");
                    item.payload += ":nulls last";
                }
            }
            order.children.push_back(std::move(item));
            if (!accept_op(",")) break;
        }
        return order;
    }

    std::pair<AstNode, AstNode> parse_limit() {
        expect_kw("limit");
        AstNode first_expr = parse_expr();
        AstNode limit(AstKind::Limit);
        AstNode offset(AstKind::Select);  // placeholder kind when absent
        if (accept_op(",")) {
            // LIMIT <offset>, <count>
            offset = AstNode(AstKind::Offset);
            offset.children.push_back(std::move(first_expr));
            limit.children.push_back(parse_expr());
        } else {
            limit.children.push_back(std::move(first_expr));
            if (accept_kw("offset")) {
                offset = AstNode(AstKind::Offset);
                offset.children.push_back(parse_expr());
            }
        }
        return {std::move(limit), std::move(offset)};
    }

    // ── expressions ─────────────────────────────────────────────

    AstNode parse_expr() { return parse_or(); }

    AstNode parse_or() {
        AstNode left = parse_and();
        while (at_kw("or")) {
            advance();
            AstNode right = parse_and();
            left = AstNode(AstKind::Binary, "or", {std::move(left), std::move(right)});
        }
        return left;
    }

    AstNode parse_and() {
        AstNode left = parse_not();
        while (at_kw("and")) {
            advance();
            AstNode right = parse_not();
            left = AstNode(AstKind::Binary, "and", {std::move(left), std::move(right)});
        }
        return left;
    }

    AstNode parse_not() {
        if (at_kw("not") && !at_kw("exists", 1)) {
            advance();
            AstNode operand = parse_not();
            return AstNode(AstKind::Unary, "not", {std::move(operand)});
        }
        return parse_predicate();
    }

    AstNode parse_predicate() {
        AstNode left = parse_additive();
        while (true) {
            if (at_op("=") || at_op("<>") || at_op("!=") || at_op("<") || at_op("<=") ||
                at_op(">") || at_op(">=")) {
                std::string op = peek().text == "!=" ? "<>" : peek().text;
                advance();
                AstNode right = parse_additive();
                left = AstNode(AstKind::Binary, op, {std::move(left), std::move(right)});
                continue;
            }
            if (at_kw("is")) {
                advance();
                bool negated = accept_kw("not");
                if (accept_kw("null")) {
                    left = AstNode(AstKind::Unary, negated ? "is not null" : "is null",
                                   {std::move(left)});
                } else {
                    AstNode right = parse_additive();
                    left = AstNode(AstKind::Binary, negated ? "is not" : "is",
                                   {std::move(left), std::move(right)});
                }
                continue;
            }
            bool negated = false;
            std::size_t saved = pos_;
            if (at_kw("not")) {
                negated = true;
                advance();
            }
            if (at_kw("like") || at_kw("glob")) {
                std::string op = (negated ? "not " : "") + peek().text;
                advance();
                AstNode right = parse_additive();
                AstNode pred(AstKind::Binary, op, {std::move(left), std::move(right)});
                if (accept_kw("escape")) pred.children.push_back(parse_additive());
                left = std::move(pred);
                continue;
            }
            if (at_kw("in")) {
                advance();
                AstNode in(AstKind::InList, negated ? "not in" : "in");
                in.children.push_back(std::move(left));
                expect_op("(");
                if (at_kw("select") || at_kw("with")) {
                    AstNode sub(AstKind::Subquery);
                    sub.children.push_back(parse_statement());
                    in.children.push_back(std::move(sub));
                } else {
                    while (true) {
                        in.children.push_back(parse_expr());
                        if (!accept_op(",")) break;
                    }
                }
                expect_op(")");
                left = std::move(in);
                continue;
            }
            if (at_kw("between")) {
                advance();
                AstNode low = parse_additive();
                expect_kw("and");
                AstNode high = parse_additive();
                left = AstNode(AstKind::Between, negated ? "not between" : "between",
                               {std::move(left), std::move(low), std::move(high)});
                continue;
            }
            if (negated) pos_ = saved;  // bare NOT belongs to parse_not
            break;
        }
        return left;
    }

    AstNode parse_additive() {
        AstNode left = parse_multiplicative();
        while (at_op("+") || at_op("-") || at_op("||")) {
            std::string op = peek().text;
            advance();
            AstNode right = parse_multiplicative();
            left = AstNode(AstKind::Binary, op, {std::move(left), std::move(right)});
        }
        return left;
    }

    AstNode parse_multiplicative() {
        AstNode left = parse_unary();
        while (at_op("*") || at_op("/") || at_op("%")) {
            std::string op = peek().text;
            advance();
            AstNode right = parse_unary();
            left = AstNode(AstKind::Binary, op, {std::move(left), std::move(right)});
        }
        return left;
    }

    AstNode parse_unary() {
        if (at_op("-") || at_op("+")) {
            std::string op = peek().text;
            advance();
            AstNode operand = parse_unary();
            // fold sign into the literal class: -5 is still a NUM
            if (operand.kind == AstKind::Literal && operand.payload == "NUM")
                return operand;
            return AstNode(AstKind::Unary, op, {std::move(operand)});
        }
        return parse_primary();
    }

    AstNode parse_primary() {
        const Token& t = peek();
        switch (t.kind) {
            case TokenKind::Number:
                advance();
                return AstNode(AstKind::Literal, "NUM");
            case TokenKind::String: {
                std::string_view body(t.text);
                body.remove_prefix(1);
                if (!body.empty()) body.remove_suffix(1);
                advance();
                return AstNode(AstKind::Literal, looks_like_date(body) ? "DATE" : "STR");
            }
            case TokenKind::Operator:
                if (t.text == "*") {
                    advance();
                    return AstNode(AstKind::Star);
                }
                if (t.text == "(") {
                    advance();
                    if (at_kw("select") || at_kw("with")) {
                        AstNode sub(AstKind::Subquery);
                        sub.children.push_back(parse_statement());
                        expect_op(")");
                        return sub;
                    }
                    AstNode inner = parse_expr();
                    expect_op(")");
                    return inner;
                }
                throw ParseError("unexpected token '" + t.text + "'", t.offset);
            case TokenKind::Identifier:
                break;
            case TokenKind::End:
                throw ParseError("unexpected end of input", t.offset);
        }

        const std::string word = t.text;
        if (word == "null") {
            advance();
            return AstNode(AstKind::Literal, "NULL");
        }
        if (word == "true" || word == "false") {
            advance();
            return AstNode(AstKind::Literal, "BOOL");
        }
        if (word == "case") return parse_case();
        if (word == "cast") return parse_cast();
        if (word == "exists" || (word == "not" && at_kw("exists", 1))) {
            bool negated = word == "not";
            advance();
            if (negated) advance();
            expect_op("(");
            AstNode sub(AstKind::Subquery);
            sub.children.push_back(parse_statement());
            expect_op(")");
            return AstNode(AstKind::Unary, negated ? "not exists" : "exists", {std::move(sub)});
        }
        if (clause_keywords().count(word) && word != "left" && word != "right")
            throw ParseError("unexpected keyword '" + word + "'", t.offset);

        // function call?
        if (at_op("(", 1)) return parse_func_call();

        advance();
        if (accept_op(".")) {
            if (accept_op("*")) return AstNode(AstKind::Star, word);
            std::string col = expect_identifier("column name");
            return AstNode(AstKind::ColumnRef, word + "." + col);
        }
        return AstNode(AstKind::ColumnRef, word);
    }

    AstNode parse_func_call() {
        std::string name = expect_identifier("function name");
        expect_op("(");
        AstNode func(AstKind::FuncCall, name);
        if (accept_kw("distinct")) func.payload += ":distinct";
        if (at_op("*")) {
            advance();
            func.children.emplace_back(AstKind::Star);
        } else if (!at_op(")")) {
            while (true) {
                func.children.push_back(parse_expr());
                if (!accept_op(",")) break;
            }
        }
        expect_op(")");
        if (accept_kw("over")) func.children.push_back(parse_window());
        return func;
    }

    AstNode parse_window() {
        expect_op("(");
        AstNode window(AstKind::Window);
        if (at_kw("partition")) {
            advance();
            expect_kw("by");
            AstNode part(AstKind::PartitionBy);
            while (true) {
                part.children.push_back(parse_expr());
                if (!accept_op(",")) break;
            }
            window.children.push_back(std::move(part));
        }
        if (at_kw("order")) window.children.push_back(parse_order_by());
        if (at_kw("rows") || at_kw("range") || at_kw("groups")) {
            std::string spec = peek().text;
            advance();
            auto bound = [&]() -> std::string {
                if (accept_kw("unbounded")) {
                    if (accept_kw("preceding")) return "unbounded preceding";
                    expect_kw("following");
                    return "unbounded following";
                }
                if (accept_kw("current")) {
                    expect_kw("row");
                    return "current row";
                }
                parse_additive();  // numeric bound; value normalized away
                if (accept_kw("preceding")) return "num preceding";
                expect_kw("following");
                return "num following";
            };
            if (accept_kw("between")) {
                std::string lo = bound();
                expect_kw("and");
                std::string hi = bound();
                spec += " between " + lo + " and " + hi;
            } else {
                spec += " " + bound();
            }
            window.children.emplace_back(AstKind::Frame, spec);
        }
        expect_op(")");
        return window;
    }

    AstNode parse_case() {
        expect_kw("case");
        AstNode node(AstKind::Case);
        if (!at_kw("when")) node.children.push_back(parse_expr());
        while (accept_kw("when")) {
            AstNode when(AstKind::CaseWhen);
            when.children.push_back(parse_expr());
            expect_kw("then");
            when.children.push_back(parse_expr());
            node.children.push_back(std::move(when));
        }
        if (accept_kw("else")) {
            AstNode els(AstKind::CaseElse);
            els.children.push_back(parse_expr());
            node.children.push_back(std::move(els));
        }
        expect_kw("end");
        return node;
    }

    AstNode parse_cast() {
        expect_kw("cast");
        expect_op("(");
        AstNode inner = parse_expr();
        expect_kw("as");
        std::string type = expect_identifier("type name");
        // multi-word types and parenthesized widths: VARCHAR(10), DOUBLE PRECISION
        while (peek().kind == TokenKind::Identifier && !at_op(")")) {
            type += " " + peek().text;
            advance();
        }
        if (accept_op("(")) {
            while (!at_op(")") && !at_end()) advance();
            expect_op(")");
        }
        expect_op(")");
        return AstNode(AstKind::Cast, type, {std::move(inner)});
    }
};

}  // namespace detail

/// Parse one SQL statement into a normalized AST.
inline QueryAst parse(std::string_view sql) {
    if (sql.empty()) throw ParseError("empty input", 0);
    return detail::Parser(sql).parse_single_statement();
}

// ── canonical rendering ─────────────────────────────────────────

namespace detail {

inline std::string upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

inline std::string render_node(const AstNode& n);

inline std::string render_children_list(const AstNode& n, std::size_t from,
                                         const char* sep = ", ") {
    std::string out;
    for (std::size_t i = from; i < n.children.size(); ++i) {
        if (i > from) out += sep;
        out += render_node(n.children[i]);
    }
    return out;
}

inline std::string render_literal(const AstNode& n) {
    if (n.payload == "NUM") return "0";
    if (n.payload == "STR") return "''";
    if (n.payload == "DATE") return "'0001-01-01'";
    if (n.payload == "NULL") return "NULL";
    return "TRUE";  // BOOL
}

inline std::string render_select(const AstNode& n) {
    std::string out = "SELECT ";
    if (n.payload == "distinct") out += "DISTINCT ";
    for (const AstNode& c : n.children) {
        switch (c.kind) {
            case AstKind::SelectList: out += render_children_list(c, 0); break;
            case AstKind::From: out += " FROM " + render_node(c.children[0]); break;
            case AstKind::Where: out += " WHERE " + render_node(c.children[0]); break;
            case AstKind::GroupBy: out += " GROUP BY " + render_children_list(c, 0); break;
            case AstKind::Having: out += " HAVING " + render_node(c.children[0]); break;
            case AstKind::OrderBy: out += " " + render_node(c); break;
            case AstKind::Limit: out += " " + render_node(c); break;
            case AstKind::Offset: out += " " + render_node(c); break;
            default: break;
        }
    }
    return out;
}

inline std::string render_node(const AstNode& n) {
    switch (n.kind) {
        case AstKind::With: {
            std::string out = "WITH ";
            if (n.payload == "recursive") out += "RECURSIVE ";
            for (std::size_t i = 0; i + 1 < n.children.size(); ++i) {
                if (i) out += ", ";
                out += render_node(n.children[i]);
            }
            out += " " + render_node(n.children.back());
            return out;
        }
        case AstKind::Cte: {
            std::string out = n.payload;
            std::size_t body = 0;
            if (n.children[0].kind == AstKind::ColumnList) {
                out += " (" + render_children_list(n.children[0], 0) + ")";
                body = 1;
            }
            return out + " AS (" + render_node(n.children[body]) + ")";
        }
        case AstKind::Compound: {
            std::string out = render_node(n.children[0]) + " " + upper(n.payload) + " " +
                              render_node(n.children[1]);
            for (std::size_t i = 2; i < n.children.size(); ++i)
                out += " " + render_node(n.children[i]);
            return out;
        }
        case AstKind::Select: return render_select(n);
        case AstKind::SelectItem: {
            std::string out = render_node(n.children[0]);
            if (!n.payload.empty()) out += " AS " + n.payload;
            return out;
        }
        case AstKind::Star: return n.payload.empty() ? "*" : n.payload + ".*";
        case AstKind::From: return render_node(n.children[0]);
        case AstKind::Join: {
            std::string out = render_node(n.children[0]);
            if (n.payload == "comma") out += ", ";
            else if (n.payload == "inner") out += " JOIN ";
            else out += " " + upper(n.payload) + " JOIN ";
            out += render_node(n.children[1]);
            if (n.children.size() > 2) {
                const AstNode& cond = n.children[2];
                if (cond.kind == AstKind::On) out += " ON " + render_node(cond.children[0]);
                else out += " USING (" + render_children_list(cond, 0) + ")";
            }
            return out;
        }
        case AstKind::TableRef: {
            std::string out = n.payload;
            if (!n.children.empty()) out += " AS " + n.children[0].payload;
            return out;
        }
        case AstKind::SubqueryTable: {
            std::string out = "(" + render_node(n.children[0]) + ")";
            if (n.children.size() > 1) out += " AS " + n.children[1].payload;
            return out;
        }
        case AstKind::OrderBy: return "ORDER BY " + render_children_list(n, 0);
        case AstKind::OrderItem: {
            std::string out = render_node(n.children[0]);
            std::string dir = n.payload.substr(0, n.payload.find(':'));
            out += " " + upper(dir);
            if (auto p = n.payload.find(':'); p != std::string::npos)
                out += " " + upper(n.payload.substr(p + 1));
            return out;
        }
        case AstKind::Limit: return "LIMIT " + render_node(n.children[0]);
        case AstKind::Offset: return "OFFSET " + render_node(n.children[0]);
        case AstKind::Binary: {
            static const std::unordered_set<std::string> word_ops = {
                "and", "or", "like", "not like", "glob", "not glob", "is", "is not"};
            std::string op = word_ops.count(n.payload) ? upper(n.payload) : n.payload;
            std::string out =
                "(" + render_node(n.children[0]) + " " + op + " " + render_node(n.children[1]);
            if (n.children.size() > 2) out += " ESCAPE " + render_node(n.children[2]);
            return out + ")";
        }
        case AstKind::Unary: {
            if (n.payload == "is null" || n.payload == "is not null")
                return "(" + render_node(n.children[0]) + " " + upper(n.payload) + ")";
            if (n.payload == "exists" || n.payload == "not exists")
                return "(" + upper(n.payload) + " " + render_node(n.children[0]) + ")";
            if (n.payload == "not") return "(NOT " + render_node(n.children[0]) + ")";
            return "(" + n.payload + render_node(n.children[0]) + ")";
        }
        case AstKind::FuncCall: {
            std::string name = n.payload;
            bool distinct = false;
            if (auto p = name.find(':'); p != std::string::npos) {
                distinct = true;
                name = name.substr(0, p);
            }
            std::string out = name + "(";
            if (distinct) out += "DISTINCT ";
            std::size_t arg_end = n.children.size();
            bool has_window = arg_end && n.children.back().kind == AstKind::Window;
            if (has_window) --arg_end;
            for (std::size_t i = 0; i < arg_end; ++i) {
                if (i) out += ", ";
                out += render_node(n.children[i]);
            }
            out += ")";
            if (has_window) out += " OVER (" + render_node(n.children.back()) + ")";
            return out;
        }
        case AstKind::Window: {
            std::string out;
            for (const AstNode& c : n.children) {
                if (!out.empty()) out += " ";
                out += render_node(c);
            }
            return out;
        }
        case AstKind::PartitionBy: return "PARTITION BY " + render_children_list(n, 0);
        case AstKind::Frame: {
            // "rows between num preceding and current row" → "ROWS BETWEEN 0 PRECEDING ..."
            std::string out;
            std::size_t i = 0;
            const std::string& s = n.payload;
            while (i < s.size()) {
                std::size_t j = s.find(' ', i);
                if (j == std::string::npos) j = s.size();
                std::string word = s.substr(i, j - i);
                if (!out.empty()) out += " ";
                out += word == "num" ? "0" : upper(word);
                i = j + 1;
            }
            return out;
        }
        case AstKind::ColumnRef: return n.payload;
        case AstKind::Literal: return render_literal(n);
        case AstKind::Case: {
            std::string out = "CASE";
            for (const AstNode& c : n.children) {
                if (c.kind == AstKind::CaseWhen)
                    out += " WHEN " + render_node(c.children[0]) + " THEN " +
                           render_node(c.children[1]);
                else if (c.kind == AstKind::CaseElse)
                    out += " ELSE " + render_node(c.children[0]);
                else
                    out += " " + render_node(c);
            }
            return out + " END";
        }
        case AstKind::InList: {
            std::string out = "(" + render_node(n.children[0]) + " " + upper(n.payload) + " ";
            if (n.children.size() == 2 && n.children[1].kind == AstKind::Subquery)
                out += render_node(n.children[1]);
            else
                out += "(" + render_children_list(n, 1) + ")";
            return out + ")";
        }
        case AstKind::Between:
            return "(" + render_node(n.children[0]) + " " + upper(n.payload) + " " +
                   render_node(n.children[1]) + " AND " + render_node(n.children[2]) + ")";
        case AstKind::Subquery: return "(" + render_node(n.children[0]) + ")";
        case AstKind::Cast: return "CAST(" + render_node(n.children[0]) + " AS " + n.payload + ")";
        case AstKind::ColumnList: return render_children_list(n, 0);
        default: return "";
    }
}

}  // namespace detail

/// Canonical text form of a normalized AST; parse(render(ast)) == ast.
inline std::string render(const QueryAst& ast) { return detail::render_node(ast.root); }

/// Canonical normalized text of a query: parse + render.
inline std::string normalized_text(std::string_view sql) { return render(parse(sql)); }

}  // namespace sqlsynth::sql
