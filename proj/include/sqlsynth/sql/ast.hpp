// Copyright 2026 The sqlsynth Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace sqlsynth::sql {

// Normalized query AST. Each node carries a kind label plus a normalized
// payload: identifiers are lowercased, literal values are collapsed to class
// tags (NUM, STR, DATE, NULL, BOOL). Trees are rooted and ordered; two
// queries differing only in identifier case or literal values produce equal
// trees.

enum class AstKind {
    With,          // children: Cte..., body statement
    Cte,           // payload: name; children: [ColumnList], body
    Compound,      // payload: union | union all | intersect | except
    Select,        // payload: "" or "distinct"
    SelectList,
    SelectItem,    // payload: alias or ""
    Star,          // payload: qualifier or ""
    From,
    Join,          // payload: inner | left | right | full | cross | comma
    TableRef,      // payload: base table name
    Alias,         // payload: alias name
    SubqueryTable, // derived table; children: statement, [Alias]
    On,
    Using,         // children: ColumnRef...
    Where,
    GroupBy,
    Having,
    OrderBy,
    OrderItem,     // payload: asc | desc, optionally ":nulls first"/":nulls last"
    Limit,
    Offset,
    Binary,        // payload: operator (lowercased), e.g. "=", "and", "like"
    Unary,         // payload: "-", "+", "not", "is null", "is not null", "exists", "not exists"
    FuncCall,      // payload: function name, ":distinct" suffix for aggregates
    Window,        // children: [PartitionBy], [OrderBy], [Frame]
    PartitionBy,
    Frame,         // payload: normalized frame spec text
    ColumnRef,     // payload: [qualifier.]column
    Literal,       // payload: NUM | STR | DATE | NULL | BOOL
    Case,          // children: [operand], CaseWhen..., [CaseElse]
    CaseWhen,
    CaseElse,
    InList,        // payload: in | not in; children: lhs, items... or Subquery
    Between,       // payload: between | not between
    Subquery,      // scalar subquery; child: statement
    Cast,          // payload: target type; child: expr
    ColumnList,
};

struct AstNode {
    AstKind kind;
    std::string payload;
    std::vector<AstNode> children;

    AstNode(AstKind k, std::string p = {}) : kind(k), payload(std::move(p)) {}
    AstNode(AstKind k, std::string p, std::vector<AstNode> c)
        : kind(k), payload(std::move(p)), children(std::move(c)) {}

    bool operator==(const AstNode& other) const {
        return kind == other.kind && payload == other.payload && children == other.children;
    }
};

/// A parsed, normalized query. `source_token_count` records the tokenizer
/// output length of the original text; it is metadata, not part of the tree,
/// and does not participate in equality.
struct QueryAst {
    AstNode root{AstKind::Select};
    std::size_t source_token_count = 0;

    bool operator==(const QueryAst& other) const { return root == other.root; }
};

inline std::size_t node_count(const AstNode& node) {
    std::size_t n = 1;
    for (const AstNode& c : node.children) n += node_count(c);
    return n;
}

inline std::size_t node_count(const QueryAst& ast) { return node_count(ast.root); }

inline const char* ast_kind_name(AstKind k) {
    switch (k) {
        case AstKind::With: return "with";
        case AstKind::Cte: return "cte";
        case AstKind::Compound: return "compound";
        case AstKind::Select: return "select";
        case AstKind::SelectList: return "select_list";
        case AstKind::SelectItem: return "select_item";
        case AstKind::Star: return "star";
        case AstKind::From: return "from";
        case AstKind::Join: return "join";
        case AstKind::TableRef: return "table_ref";
        case AstKind::Alias: return "alias";
        case AstKind::SubqueryTable: return "subquery_table";
        case AstKind::On: return "on";
        case AstKind::Using: return "using";
        case AstKind::Where: return "where";
        case AstKind::GroupBy: return "group_by";
        case AstKind::Having: return "having";
        case AstKind::OrderBy: return "order_by";
        case AstKind::OrderItem: return "order_item";
        case AstKind::Limit: return "limit";
        case AstKind::Offset: return "offset";
        case AstKind::Binary: return "binary";
        case AstKind::Unary: return "unary";
        case AstKind::FuncCall: return "func";
        case AstKind::Window: return "window";
        case AstKind::PartitionBy: return "partition_by";
        case AstKind::Frame: return "frame";
        case AstKind::ColumnRef: return "column";
        case AstKind::Literal: return "literal";
        case AstKind::Case: return "case";
        case AstKind::CaseWhen: return "when";
        case AstKind::CaseElse: return "else";
        case AstKind::InList: return "in_list";
        case AstKind::Between: return "between";
        case AstKind::Subquery: return "subquery";
        case AstKind::Cast: return "cast";
        case AstKind::ColumnList: return "column_list";
    }
    return "?";
}

/// Debug rendering of the tree, one node per line.
inline void dump_ast(const AstNode& node, std::string& out, int depth = 0) {
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    out += ast_kind_name(node.kind);
    if (!node.payload.empty()) {
        out += '(';
        out += node.payload;
        out += ')';
    }
    out += '\n';
    for (const AstNode& c : node.children) dump_ast(c, out, depth + 1);
}

inline std::string dump_ast(const QueryAst& ast) {
    std::string out;
    dump_ast(ast.root, out);
    return out;
}

}  // namespace sqlsynth::sql
