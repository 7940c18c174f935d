// Copyright 2026 The sqlsynth Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <set>
#include <string>

#include "sqlsynth/sql/ast.hpp"

namespace sqlsynth::sql {

/// Structural shape of one query, the dimensions reported by workload
/// histograms. Counting conventions:
///  - predicates: each boolean atom under WHERE, HAVING, or ON counts once,
///    at every nesting level;
///  - joins: every join operator, comma joins included;
///  - nesting: subquery depth, top level = 0, CTE bodies and derived tables
///    count as one level;
///  - aggregates: count/sum/avg/min/max calls plus window-function calls.
struct StructuralFeatures {
    int join_count = 0;
    int predicate_count = 0;
    int nesting_depth = 0;
    int aggregate_count = 0;
    int token_length = 0;

    bool operator==(const StructuralFeatures&) const = default;
};

namespace detail {

inline void collect_cte_names(const AstNode& node, std::set<std::string>& out) {
    if (node.kind == AstKind::Cte) out.insert(node.payload);
    for (const AstNode& c : node.children) collect_cte_names(c, out);
}

inline void collect_table_refs(const AstNode& node, std::set<std::string>& out) {
    if (node.kind == AstKind::TableRef) out.insert(node.payload);
    for (const AstNode& c : node.children) collect_table_refs(c, out);
}

inline bool is_predicate_atom(const AstNode& node) {
    switch (node.kind) {
        case AstKind::InList:
        case AstKind::Between:
            return true;
        case AstKind::Binary: {
            const std::string& op = node.payload;
            return op == "=" || op == "<>" || op == "<" || op == "<=" || op == ">" ||
                   op == ">=" || op == "like" || op == "not like" || op == "glob" ||
                   op == "not glob" || op == "is" || op == "is not";
        }
        case AstKind::Unary:
            return node.payload == "is null" || node.payload == "is not null" ||
                   node.payload == "exists" || node.payload == "not exists";
        default:
            return false;
    }
}

inline bool is_aggregate_call(const AstNode& node) {
    if (node.kind != AstKind::FuncCall) return false;
    std::string name = node.payload.substr(0, node.payload.find(':'));
    if (name == "count" || name == "sum" || name == "avg" || name == "min" || name == "max")
        return true;
    return !node.children.empty() && node.children.back().kind == AstKind::Window;
}

inline void walk_features(const AstNode& node, bool in_predicate_clause, int depth,
                          StructuralFeatures& f) {
    if (node.kind == AstKind::Join) ++f.join_count;
    if (in_predicate_clause && is_predicate_atom(node)) ++f.predicate_count;
    if (is_aggregate_call(node)) ++f.aggregate_count;
    f.nesting_depth = std::max(f.nesting_depth, depth);

    bool clause = in_predicate_clause || node.kind == AstKind::Where ||
                  node.kind == AstKind::Having || node.kind == AstKind::On;
    for (std::size_t i = 0; i < node.children.size(); ++i) {
        const AstNode& c = node.children[i];
        int child_depth = depth;
        if (node.kind == AstKind::Subquery || node.kind == AstKind::SubqueryTable)
            child_depth = depth + 1;
        if (node.kind == AstKind::Cte && c.kind != AstKind::ColumnList)
            child_depth = depth + 1;
        walk_features(c, clause, child_depth, f);
    }
}

}  // namespace detail

/// Base tables referenced anywhere in the query; aliases resolve to base
/// names and CTE names are excluded.
inline std::set<std::string> referenced_tables(const QueryAst& ast) {
    std::set<std::string> ctes, tables;
    detail::collect_cte_names(ast.root, ctes);
    detail::collect_table_refs(ast.root, tables);
    for (const std::string& name : ctes) tables.erase(name);
    return tables;
}

inline StructuralFeatures structural_features(const QueryAst& ast) {
    StructuralFeatures f;
    f.token_length = static_cast<int>(ast.source_token_count);
    detail::walk_features(ast.root, false, 0, f);
    return f;
}

}  // namespace sqlsynth::sql
