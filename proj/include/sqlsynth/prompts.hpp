// Copyright 2026 The sqlsynth Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "sqlsynth/schema.hpp"

namespace sqlsynth::prompts {

// Versioned prompt templates. Structure: task instructions, then the schema
// block (with FK relationships and content hints inline), then output-format
// rules. Kept as code so tests can pin exact wording.

inline constexpr int kPromptVersion = 1;

/// Exploration prompt: open-ended synthesis over the selected tables.
inline std::string generation_prompt(const std::string& schema_block, int n_queries) {
    std::string p;
    p += "You are an expert SQL engineer writing analytical workloads.\n";
    p += "Write " + std::to_string(n_queries) +
         " new SQLite SELECT queries over the schema below.\n";
    p += "Requirements:\n";
    p += "- Avoid trivial query types such as single-table scans or bare projections.\n";
    p += "- Prefer multi-table joins along the foreign keys, nested subqueries, "
         "aggregations, and window functions.\n";
    p += "- Use realistic filter values; the column hints show real value ranges and "
         "examples.\n";
    p += "- Every query must be executable against this schema exactly as written.\n";
    p += "\nSchema:\n" + schema_block;
    p += "\nAnswer with one fenced ```sql code block containing the " +
         std::to_string(n_queries) + " queries, each terminated by a semicolon.\n";
    return p;
}

/// Exploitation prompt: structural variants of pooled seed queries.
inline std::string expansion_prompt(const std::vector<std::string>& seeds, int n_variants) {
    std::string p;
    p += "You are an expert SQL engineer scaling up a query workload.\n";
    p += "Study the seed queries below, then write " + std::to_string(n_variants) +
         " new SQLite SELECT queries derived from them.\n";
    p += "Apply varied transformations:\n";
    p += "- structural rewriting (for example subqueries rewritten as CTEs and vice versa)\n";
    p += "- substructure recombination (merge parts of seeds that share tables)\n";
    p += "- lexical variation (alias renaming, clause reordering)\n";
    p += "- logical variation (different filter thresholds, switched conjunctions, "
         "different grouping)\n";
    p += "Infer the schema from the seeds; reference only tables and columns they use. "
         "Do not repeat a seed verbatim.\n";
    p += "\nSeed queries:\n";
    for (std::size_t i = 0; i < seeds.size(); ++i)
        p += std::to_string(i + 1) + ". " + seeds[i] + ";\n";
    p += "\nAnswer with one fenced ```sql code block containing the " +
         std::to_string(n_variants) + " queries, each terminated by a semicolon.\n";
    return p;
}

/// Schema-aware planning prompt: pick tables that are structurally rich or
/// under-covered. One line per table: schema, coverage, complexity.
inline std::string table_selection_prompt(const DatabaseSchema& schema,
                                          const std::vector<TableProfile>& profiles,
                                          int n_tables) {
    std::string p;
    p += "You plan SQL workload generation over a database.\n";
    p += "Pick " + std::to_string(n_tables) +
         " tables to target next. Prefer tables with high structural complexity and few "
         "existing queries.\n\nTables:\n";
    for (const TableProfile& profile : profiles) {
        const TableSchema* t = schema.find_table(profile.table);
        p += "- " + profile.table + " (columns:";
        if (t) {
            for (const ColumnSchema& c : t->columns) p += " " + c.name;
        }
        p += ") queries_so_far=" + std::to_string(profile.query_count) +
             " complexity=" + std::to_string(profile.complexity) + "\n";
    }
    p += "\nAnswer with the table names only, one per line.\n";
    return p;
}

/// Scheduling advice prompt for the reasoner; the caller enforces hard guards
/// on the answer.
inline std::string management_prompt(int round, const std::string& phase,
                                     double executable_fraction,
                                     double mean_max_neighbor_similarity,
                                     double expansion_ratio,
                                     const std::string& neighbor_summary) {
    std::string p;
    p += "You schedule a SQL synthesis pipeline that alternates between two teams:\n";
    p += "GEN explores novel query structures with a strong model; EXP scales known "
         "patterns cheaply.\n";
    p += "Current state:\n";
    p += "- round: " + std::to_string(round) + "\n";
    p += "- phase: " + phase + "\n";
    p += "- executable fraction last round: " + std::to_string(executable_fraction) + "\n";
    p += "- mean max-neighbor similarity last round: " +
         std::to_string(mean_max_neighbor_similarity) + "\n";
    p += "- expansion ratio of the pool: " + std::to_string(expansion_ratio) + "\n";
    if (!neighbor_summary.empty()) p += "- nearest-neighbor digest: " + neighbor_summary + "\n";
    p += "High redundancy or falling executability calls for GEN; healthy variety calls "
         "for EXP.\n";
    p += "Answer with exactly one word: GEN or EXP.\n";
    return p;
}

}  // namespace sqlsynth::prompts
