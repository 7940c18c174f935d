// Copyright 2026 The sqlsynth Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sqlsynth/detail/sqlite_util.hpp"
#include "sqlsynth/error.hpp"

namespace sqlsynth {

// Schema ingestion runs DDL through the execution engine itself (an in-memory
// SQLite database) and introspects the result, so the catalog always agrees
// with what the harness will accept. Live databases are introspected the same
// way.

enum class TypeClass { Numeric, Date, EnumLike, Text, Other };

inline const char* type_class_name(TypeClass t) {
    switch (t) {
        case TypeClass::Numeric: return "numeric";
        case TypeClass::Date: return "date";
        case TypeClass::EnumLike: return "enum";
        case TypeClass::Text: return "text";
        case TypeClass::Other: return "other";
    }
    return "?";
}

struct ColumnSchema {
    std::string name;
    std::string declared_type;
    TypeClass type_class = TypeClass::Other;
};

struct ForeignKey {
    int constraint_id = 0;       // one constraint may span several columns
    std::string column;          // local column
    std::string ref_table;
    std::string ref_column;
};

struct TableSchema {
    std::string name;
    std::vector<ColumnSchema> columns;
    std::vector<ForeignKey> foreign_keys;

    const ColumnSchema* find_column(std::string_view col) const {
        for (const ColumnSchema& c : columns)
            if (c.name == col) return &c;
        return nullptr;
    }

    /// Number of distinct FK constraints declared on this table.
    int outgoing_fk_count() const {
        std::set<int> ids;
        for (const ForeignKey& fk : foreign_keys) ids.insert(fk.constraint_id);
        return static_cast<int>(ids.size());
    }
};

struct DatabaseSchema {
    std::string name;
    std::vector<TableSchema> tables;  // in schema (creation) order

    const TableSchema* find_table(std::string_view table) const {
        for (const TableSchema& t : tables)
            if (t.name == table) return &t;
        return nullptr;
    }

    /// Validates naming uniqueness and that every FK edge lands on an
    /// existing table and column.
    void validate() const {
        std::set<std::string> names;
        for (const TableSchema& t : tables) {
            if (!names.insert(t.name).second)
                throw Error(ErrorCode::ValidationError, "duplicate table name: " + t.name);
            std::set<std::string> cols;
            for (const ColumnSchema& c : t.columns)
                if (!cols.insert(c.name).second)
                    throw Error(ErrorCode::ValidationError,
                                "duplicate column " + t.name + "." + c.name);
            for (const ForeignKey& fk : t.foreign_keys) {
                std::string edge = t.name + "." + fk.column + " -> " + fk.ref_table + "." +
                                   fk.ref_column;
                const TableSchema* ref = find_table(fk.ref_table);
                if (!ref)
                    throw Error(ErrorCode::ValidationError,
                                "foreign key references missing table: " + edge);
                if (!t.find_column(fk.column) || !ref->find_column(fk.ref_column))
                    throw Error(ErrorCode::ValidationError,
                                "foreign key references missing column: " + edge);
            }
        }
    }
};

struct SchemaCatalog {
    std::vector<DatabaseSchema> databases;

    void validate() const {
        for (const DatabaseSchema& db : databases) db.validate();
    }
};

// ── ingestion ───────────────────────────────────────────────────

namespace detail {

inline TypeClass classify_declared_type(std::string_view declared) {
    std::string t;
    for (char c : declared) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    auto has = [&](std::string_view needle) { return t.find(needle) != std::string::npos; };
    if (has("int") || has("real") || has("floa") || has("doub") || has("num") || has("dec") ||
        has("bool") || has("money"))
        return TypeClass::Numeric;
    if (has("date") || has("time"))
        return TypeClass::Date;
    if (has("char") || has("clob") || has("text") || has("string"))
        return TypeClass::Text;
    return TypeClass::Other;
}

inline std::string quote_identifier(std::string_view name) {
    std::string out = "\"";
    for (char c : name) {
        out.push_back(c);
        if (c == '"') out.push_back('"');
    }
    out.push_back('"');
    return out;
}

/// Walk sqlite_master plus the table_info/foreign_key_list pragmas.
inline DatabaseSchema introspect_handle(sqlite3* db, std::string name) {
    DatabaseSchema out;
    out.name = std::move(name);
    Stmt tables(db,
                "SELECT name FROM sqlite_master WHERE type='table' "
                "AND name NOT LIKE 'sqlite_%' ORDER BY rowid");
    while (tables.step()) {
        TableSchema table;
        table.name = tables.column_text(0);
        Stmt cols(db, "PRAGMA table_info(" + quote_identifier(table.name) + ")");
        while (cols.step()) {
            ColumnSchema col;
            col.name = cols.column_text(1);
            col.declared_type = cols.column_text(2);
            col.type_class = classify_declared_type(col.declared_type);
            table.columns.push_back(std::move(col));
        }
        Stmt fks(db, "PRAGMA foreign_key_list(" + quote_identifier(table.name) + ")");
        while (fks.step()) {
            ForeignKey fk;
            fk.constraint_id = static_cast<int>(fks.column_int64(0));
            fk.ref_table = fks.column_text(2);
            fk.column = fks.column_text(3);
            fk.ref_column = fks.column_text(4);
            table.foreign_keys.push_back(std::move(fk));
        }
        out.tables.push_back(std::move(table));
    }
    // a FK without explicit target column refers to the referenced table's
    // primary key
    for (TableSchema& table : out.tables) {
        for (ForeignKey& fk : table.foreign_keys) {
            if (!fk.ref_column.empty()) continue;
            if (const TableSchema* ref = out.find_table(fk.ref_table)) {
                Stmt pk(db, "PRAGMA table_info(" + quote_identifier(ref->name) + ")");
                while (pk.step()) {
                    if (pk.column_int64(5) > 0) {
                        fk.ref_column = pk.column_text(1);
                        break;
                    }
                }
            }
        }
    }
    return out;
}

}  // namespace detail

/// Execute DDL text into a scratch in-memory database and introspect it.
/// Statement-level errors carry the byte offset of the failing statement.
inline DatabaseSchema ingest_ddl(std::string db_name, std::string_view ddl) {
    detail::DbHandle scratch = detail::DbHandle::open_memory();
    const char* cursor = ddl.data();
    const char* end = ddl.data() + ddl.size();
    while (cursor < end) {
        sqlite3_stmt* raw = nullptr;
        const char* tail = nullptr;
        int rc = sqlite3_prepare_v2(scratch.get(), cursor,
                                    static_cast<int>(end - cursor), &raw, &tail);
        if (rc != SQLITE_OK) {
            std::size_t offset = static_cast<std::size_t>(cursor - ddl.data());
            throw ParseError(std::string("DDL error: ") + sqlite3_errmsg(scratch.get()), offset);
        }
        if (raw) {
            int step_rc = sqlite3_step(raw);
            sqlite3_finalize(raw);
            if (step_rc != SQLITE_DONE && step_rc != SQLITE_ROW) {
                std::size_t offset = static_cast<std::size_t>(cursor - ddl.data());
                throw ParseError(std::string("DDL error: ") + sqlite3_errmsg(scratch.get()),
                                 offset);
            }
        }
        if (tail == cursor) break;  // nothing consumed (whitespace/comments)
        cursor = tail;
    }
    DatabaseSchema schema = detail::introspect_handle(scratch.get(), std::move(db_name));
    schema.validate();
    return schema;
}

/// Ingest `<db_name>/schema.sql`; the database name comes from the parent
/// directory, falling back to the file stem.
inline DatabaseSchema ingest_ddl_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::NotFound, "cannot read DDL file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    std::string name = path.parent_path().filename().string();
    if (name.empty() || name == ".") name = path.stem().string();
    return ingest_ddl(std::move(name), buf.str());
}

/// Introspect a live database file.
inline DatabaseSchema introspect_database(const std::string& db_path, std::string db_name = {}) {
    detail::DbHandle db = detail::DbHandle::open(db_path, SQLITE_OPEN_READONLY);
    if (db_name.empty()) db_name = std::filesystem::path(db_path).stem().string();
    DatabaseSchema schema = detail::introspect_handle(db.get(), std::move(db_name));
    schema.validate();
    return schema;
}

// ── enum detection ──────────────────────────────────────────────

/// Text columns whose sampled distinct-value count stays at or below
/// `threshold` are reclassified as enum-like. Requires data.
inline void apply_enum_detection(DatabaseSchema& schema, sqlite3* db, int threshold = 20,
                                 int sample_rows = 1000) {
    for (TableSchema& table : schema.tables) {
        for (ColumnSchema& col : table.columns) {
            if (col.type_class != TypeClass::Text) continue;
            std::string q = "SELECT COUNT(DISTINCT v) FROM (SELECT " +
                            detail::quote_identifier(col.name) + " AS v FROM " +
                            detail::quote_identifier(table.name) +
                            " WHERE v IS NOT NULL LIMIT " + std::to_string(sample_rows) + ")";
            detail::Stmt stmt(db, q);
            stmt.step();
            std::int64_t distinct = stmt.column_int64(0);
            if (distinct > 0 && distinct <= threshold) col.type_class = TypeClass::EnumLike;
        }
    }
}

// ── content hints ───────────────────────────────────────────────

inline constexpr int kHintValueCap = 5;

struct ColumnHints {
    TypeClass type_class = TypeClass::Other;
    std::vector<std::string> values;            // enum/text samples, ≤ 5
    std::optional<std::string> min_value;       // numeric/date
    std::optional<std::string> max_value;
};

struct ContentHints {
    std::string table;
    std::map<std::string, ColumnHints> columns;
    bool empty_table = false;
};

/// Per-column value hints for prompt construction. Enum-like columns report
/// their most frequent values, numeric/date columns their observed range,
/// text columns a seeded random sample of distinct values.
inline ContentHints collect_content_hints(sqlite3* db, const DatabaseSchema& schema,
                                          std::string_view table, std::uint64_t seed = 0,
                                          int sample_pool = 1000) {
    const TableSchema* ts = schema.find_table(table);
    if (!ts) throw Error(ErrorCode::NotFound, "unknown table: " + std::string(table));

    ContentHints hints;
    hints.table = ts->name;
    {
        detail::Stmt count(db, "SELECT COUNT(*) FROM " + detail::quote_identifier(ts->name));
        count.step();
        hints.empty_table = count.column_int64(0) == 0;
    }
    for (const ColumnSchema& col : ts->columns) {
        ColumnHints ch;
        ch.type_class = col.type_class;
        const std::string qcol = detail::quote_identifier(col.name);
        const std::string qtable = detail::quote_identifier(ts->name);
        if (hints.empty_table) {
            hints.columns.emplace(col.name, std::move(ch));
            continue;
        }
        switch (col.type_class) {
            case TypeClass::EnumLike: {
                detail::Stmt stmt(db, "SELECT " + qcol + ", COUNT(*) AS c FROM " + qtable +
                                          " WHERE " + qcol +
                                          " IS NOT NULL GROUP BY 1 ORDER BY c DESC, 1 ASC "
                                          "LIMIT " + std::to_string(kHintValueCap));
                while (stmt.step()) ch.values.push_back(stmt.column_text(0));
                break;
            }
            case TypeClass::Numeric:
            case TypeClass::Date: {
                detail::Stmt stmt(db, "SELECT MIN(" + qcol + "), MAX(" + qcol + ") FROM " +
                                          qtable);
                stmt.step();
                if (!stmt.column_null(0)) {
                    ch.min_value = stmt.column_text(0);
                    ch.max_value = stmt.column_text(1);
                }
                break;
            }
            case TypeClass::Text: {
                detail::Stmt stmt(db, "SELECT DISTINCT " + qcol + " FROM " + qtable + " WHERE " +
                                          qcol + " IS NOT NULL ORDER BY 1 LIMIT " +
                                          std::to_string(sample_pool));
                std::vector<std::string> all;
                while (stmt.step()) all.push_back(stmt.column_text(0));
                if (static_cast<int>(all.size()) <= kHintValueCap) {
                    ch.values = std::move(all);
                } else {
                    std::mt19937_64 rng(seed);
                    std::sample(all.begin(), all.end(), std::back_inserter(ch.values),
                                kHintValueCap, rng);
                }
                break;
            }
            case TypeClass::Other:
                break;
        }
        hints.columns.emplace(col.name, std::move(ch));
    }
    return hints;
}

// ── complexity profiling ────────────────────────────────────────

struct TableProfile {
    std::string table;
    int na = 0;             // attribute count
    int rd = 0;             // outgoing FK constraint count
    int drt = 0;            // depth of referential tree
    int complexity = 0;     // na + 2*rd + drt
    std::int64_t query_count = 0;
    int incoming_refs = 0;  // exported alongside, never part of complexity
};

namespace detail {

inline int longest_outgoing_path(const DatabaseSchema& schema, const std::string& table,
                                 std::set<std::string>& visited) {
    const TableSchema* ts = schema.find_table(table);
    if (!ts) return 0;
    std::set<std::string> targets;
    for (const ForeignKey& fk : ts->foreign_keys) targets.insert(fk.ref_table);
    int best = 0;
    for (const std::string& next : targets) {
        if (visited.count(next) || !schema.find_table(next)) continue;
        visited.insert(next);
        best = std::max(best, 1 + longest_outgoing_path(schema, next, visited));
        visited.erase(next);
    }
    return best;
}

}  // namespace detail

/// Longest acyclic chain of outgoing FK edges starting at `table`. A visited
/// set guards against cycles, so the depth is finite on any graph.
inline int referential_tree_depth(const DatabaseSchema& schema, const std::string& table) {
    std::set<std::string> visited{table};
    return detail::longest_outgoing_path(schema, table, visited);
}

/// Structural complexity plus pool coverage for one table.
inline TableProfile profile_table(const DatabaseSchema& schema,
                                  const std::map<std::string, std::int64_t>& pool_stats,
                                  const std::string& table) {
    const TableSchema* ts = schema.find_table(table);
    if (!ts) throw Error(ErrorCode::NotFound, "unknown table: " + table);
    TableProfile p;
    p.table = table;
    p.na = static_cast<int>(ts->columns.size());
    p.rd = ts->outgoing_fk_count();
    p.drt = referential_tree_depth(schema, table);
    p.complexity = p.na + 2 * p.rd + p.drt;
    if (auto it = pool_stats.find(table); it != pool_stats.end()) p.query_count = it->second;
    for (const TableSchema& other : schema.tables) {
        std::set<int> ids;
        for (const ForeignKey& fk : other.foreign_keys)
            if (fk.ref_table == table) ids.insert(fk.constraint_id);
        p.incoming_refs += static_cast<int>(ids.size());
    }
    return p;
}

inline std::vector<TableProfile> profile_all_tables(
    const DatabaseSchema& schema, const std::map<std::string, std::int64_t>& pool_stats) {
    std::vector<TableProfile> out;
    out.reserve(schema.tables.size());
    for (const TableSchema& t : schema.tables)
        out.push_back(profile_table(schema, pool_stats, t.name));
    return out;
}

/// CSV export feeding the coverage report.
inline std::string profiles_csv(const std::vector<TableProfile>& profiles) {
    std::string out = "table,na,rd,drt,complexity,query_count,incoming_refs\n";
    for (const TableProfile& p : profiles) {
        out += p.table + "," + std::to_string(p.na) + "," + std::to_string(p.rd) + "," +
               std::to_string(p.drt) + "," + std::to_string(p.complexity) + "," +
               std::to_string(p.query_count) + "," + std::to_string(p.incoming_refs) + "\n";
    }
    return out;
}

// ── prompt schema block ─────────────────────────────────────────

/// Structured text block describing the selected tables: columns with types,
/// explicit FK relationships, and inline content hints. Ordering follows the
/// schema, so output is deterministic.
inline std::string render_schema_block(const DatabaseSchema& schema,
                                       const std::set<std::string>& tables,
                                       const std::map<std::string, ContentHints>& hints = {}) {
    for (const std::string& t : tables)
        if (!schema.find_table(t))
            throw Error(ErrorCode::NotFound, "unknown table: " + t);
    std::string out;
    for (const TableSchema& table : schema.tables) {
        if (!tables.count(table.name)) continue;
        out += "Table: " + table.name + "\n";
        const ContentHints* th = nullptr;
        if (auto it = hints.find(table.name); it != hints.end()) th = &it->second;
        for (const ColumnSchema& col : table.columns) {
            out += "  - " + col.name + " (" + col.declared_type + ", " +
                   type_class_name(col.type_class) + ")";
            if (th) {
                if (auto it = th->columns.find(col.name); it != th->columns.end()) {
                    const ColumnHints& ch = it->second;
                    if (!ch.values.empty()) {
                        out += " examples:";
                        for (std::size_t i = 0; i < ch.values.size(); ++i)
                            out += (i ? ", '" : " '") + ch.values[i] + "'";
                    } else if (ch.min_value) {
                        out += " range: " + *ch.min_value + " .. " + *ch.max_value;
                    }
                }
            }
            out += "\n";
        }
        bool header = false;
        for (const ForeignKey& fk : table.foreign_keys) {
            if (!tables.count(fk.ref_table) && !schema.find_table(fk.ref_table)) continue;
            if (!header) {
                out += "  Foreign keys:\n";
                header = true;
            }
            out += "    " + table.name + "." + fk.column + " -> " + fk.ref_table + "." +
                   fk.ref_column + "\n";
        }
        out += "\n";
    }
    return out;
}

}  // namespace sqlsynth
