// Copyright 2026 The sqlsynth Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqlsynth/ann.hpp"
#include "sqlsynth/detail/sqlite_util.hpp"
#include "sqlsynth/embedding.hpp"
#include "sqlsynth/error.hpp"
#include "sqlsynth/schema.hpp"
#include "sqlsynth/similarity.hpp"
#include "sqlsynth/sql/analysis.hpp"
#include "sqlsynth/sql/lexer.hpp"
#include "sqlsynth/sql/parser.hpp"

namespace sqlsynth {

// Durable store of accepted queries (table R) and their embeddings (table E),
// transactionally coupled: a record never exists without its vector. Rounds
// can be wrapped in a single transaction so a crashed round leaves no trace.
//
// Concurrency contract: one writer at a time; reads may run concurrently
// with each other.

enum class Origin { Gen, Exp };

inline const char* origin_name(Origin o) { return o == Origin::Gen ? "GEN" : "EXP"; }

inline Origin origin_from_name(std::string_view name) {
    if (name == "GEN") return Origin::Gen;
    if (name == "EXP") return Origin::Exp;
    throw Error(ErrorCode::InvalidInput, "unknown origin: " + std::string(name));
}

struct SqlQueryRecord {
    std::int64_t id = 0;
    std::string sql_text;
    std::string normalized_text;
    std::set<std::string> referenced_tables;
    Origin origin = Origin::Gen;
    int round = 0;
    sql::StructuralFeatures features;
    bool executable = true;
    bool empty_result = false;
    double max_neighbor_similarity = 0.0;  // at acceptance time
    std::string created_at;
};

struct InsertResult {
    bool inserted = false;
    std::int64_t id = 0;  // new id, or the existing record's id on duplicate
};

struct ExpansionRatio {
    double ratio = 0.0;
    bool empty_pool = false;
};

inline constexpr int kPoolSchemaVersion = 1;

class SqlPool {
public:
    /// Open or create a pool file. The embedding dimension is fixed at
    /// creation; reopening validates it.
    explicit SqlPool(const std::string& path, int embedding_dim = kDefaultEmbeddingDim,
                     std::unique_ptr<VectorIndex> index = nullptr)
        : path_(path),
          dim_(embedding_dim),
          index_(index ? std::move(index) : std::make_unique<ExactScanIndex>()) {
        db_ = detail::DbHandle::open(path, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE);
        detail::exec_or_throw(db_.get(), "PRAGMA journal_mode=WAL");
        detail::exec_or_throw(db_.get(), "PRAGMA synchronous=NORMAL");
        init_schema();
        load_mirror();
    }

    const std::string& path() const { return path_; }
    int embedding_dim() const { return dim_; }
    std::size_t size() const { return records_.size(); }

    // ── round transactions ──────────────────────────────────────

    /// All inserts until commit_round() belong to one transaction; a crash or
    /// rollback restores the pool to the round boundary.
    void begin_round() {
        if (in_round_) throw Error(ErrorCode::StorageError, "round already open");
        detail::exec_or_throw(db_.get(), "BEGIN IMMEDIATE");
        in_round_ = true;
        round_start_size_ = records_.size();
    }

    void commit_round() {
        if (!in_round_) throw Error(ErrorCode::StorageError, "no open round");
        detail::exec_or_throw(db_.get(), "COMMIT");
        in_round_ = false;
    }

    void rollback_round() {
        if (!in_round_) return;
        detail::exec_or_throw(db_.get(), "ROLLBACK");
        in_round_ = false;
        // rewind the in-memory mirror to the round boundary
        for (std::size_t i = round_start_size_; i < records_.size(); ++i)
            normalized_index_.erase(records_[i].record.normalized_text);
        records_.resize(round_start_size_);
        index_->truncate(round_start_size_);
    }

    // ── insert ──────────────────────────────────────────────────

    /// Atomically append to R and E. Records must be pre-validated
    /// (executable); exact duplicates by normalized text are rejected with
    /// a duplicate signal and leave the pool unchanged.
    InsertResult insert(const SqlQueryRecord& record, const EmbeddingVector& vector) {
        if (!record.executable)
            throw Error(ErrorCode::InvalidInput, "pool stores only validated queries");
        if (vector.dim() != dim_)
            throw Error(ErrorCode::DimensionMismatch,
                        "embedding dim " + std::to_string(vector.dim()) + " != pool dim " +
                            std::to_string(dim_));
        if (auto it = normalized_index_.find(record.normalized_text);
            it != normalized_index_.end())
            return {false, it->second};

        const bool own_txn = !in_round_;
        if (own_txn) detail::exec_or_throw(db_.get(), "BEGIN IMMEDIATE");
        else detail::exec_or_throw(db_.get(), "SAVEPOINT ins");
        std::int64_t id = 0;
        try {
            SqlQueryRecord stored = record;
            if (stored.created_at.empty()) stored.created_at = now_utc();
            {
                detail::Stmt stmt(db_.get(),
                                  "INSERT INTO r_queries (sql_text, normalized_text, "
                                  "referenced_tables, origin, round, joins, predicates, "
                                  "nesting, aggregates, tokens, executable, empty_result, "
                                  "max_neighbor_sim, created_at) "
                                  "VALUES (?,?,?,?,?,?,?,?,?,?,?,?,?,?)");
                nlohmann::json tables = nlohmann::json::array();
                for (const std::string& t : stored.referenced_tables) tables.push_back(t);
                stmt.bind(1, stored.sql_text)
                    .bind(2, stored.normalized_text)
                    .bind(3, tables.dump())
                    .bind(4, origin_name(stored.origin))
                    .bind(5, static_cast<std::int64_t>(stored.round))
                    .bind(6, static_cast<std::int64_t>(stored.features.join_count))
                    .bind(7, static_cast<std::int64_t>(stored.features.predicate_count))
                    .bind(8, static_cast<std::int64_t>(stored.features.nesting_depth))
                    .bind(9, static_cast<std::int64_t>(stored.features.aggregate_count))
                    .bind(10, static_cast<std::int64_t>(stored.features.token_length))
                    .bind(11, static_cast<std::int64_t>(1))
                    .bind(12, static_cast<std::int64_t>(stored.empty_result ? 1 : 0))
                    .bind(13, stored.max_neighbor_similarity)
                    .bind(14, stored.created_at);
                stmt.step_done();
            }
            id = sqlite3_last_insert_rowid(db_.get());

            if (fault_hook_) fault_hook_();

            {
                detail::Stmt stmt(db_.get(),
                                  "INSERT INTO e_embeddings (query_id, dim, vec, norm) "
                                  "VALUES (?,?,?,?)");
                stmt.bind(1, id).bind(2, static_cast<std::int64_t>(dim_));
                stmt.bind_blob(3, vector.values.data(), vector.values.size() * sizeof(double));
                stmt.bind(4, vector.norm > 0 ? vector.norm
                                             : detail::l2_norm(vector.values));
                stmt.step_done();
            }
            if (own_txn) detail::exec_or_throw(db_.get(), "COMMIT");
            else detail::exec_or_throw(db_.get(), "RELEASE ins");

            Entry entry;
            entry.record = std::move(stored);
            entry.record.id = id;
            entry.values = vector.values;
            records_.push_back(std::move(entry));
            normalized_index_.emplace(records_.back().record.normalized_text, id);
            index_->add(id, records_.back().values);
            return {true, id};
        } catch (...) {
            if (own_txn) sqlite3_exec(db_.get(), "ROLLBACK", nullptr, nullptr, nullptr);
            else sqlite3_exec(db_.get(), "ROLLBACK TO ins; RELEASE ins", nullptr, nullptr, nullptr);
            throw;
        }
    }

    // ── lookups and statistics ──────────────────────────────────

    const SqlQueryRecord& get(std::int64_t id) const {
        for (const Entry& e : records_)
            if (e.record.id == id) return e.record;
        throw Error(ErrorCode::NotFound, "no record with id " + std::to_string(id));
    }

    std::optional<std::int64_t> find_normalized(const std::string& normalized) const {
        if (auto it = normalized_index_.find(normalized); it != normalized_index_.end())
            return it->second;
        return std::nullopt;
    }

    /// Visit every record in id order.
    void for_each(const std::function<void(const SqlQueryRecord&)>& fn) const {
        for (const Entry& e : records_) fn(e.record);
    }

    /// Per-table query counts, zero-filled for every catalog table.
    std::map<std::string, std::int64_t> stats_per_table(const DatabaseSchema& schema) const {
        std::map<std::string, std::int64_t> counts;
        for (const TableSchema& t : schema.tables) counts[t.name] = 0;
        for (const Entry& e : records_)
            for (const std::string& t : e.record.referenced_tables)
                if (auto it = counts.find(t); it != counts.end()) ++it->second;
        return counts;
    }

    ExpansionRatio expansion_ratio() const {
        if (records_.empty()) return {0.0, true};
        std::size_t exp = 0;
        for (const Entry& e : records_)
            if (e.record.origin == Origin::Exp) ++exp;
        return {static_cast<double>(exp) / static_cast<double>(records_.size()), false};
    }

    // ── retrieval ───────────────────────────────────────────────

    /// Top-m ids by embedding cosine (the ANN candidate stage).
    std::vector<std::int64_t> ann_candidates(const EmbeddingVector& vector,
                                             std::size_t m) const {
        if (records_.empty()) throw Error(ErrorCode::InvalidInput, "pool is empty");
        return index_->candidates(vector.values, m);
    }

    /// Rerank the k×20 cosine candidates by hybrid score; ties break toward
    /// lower id for determinism.
    std::vector<std::pair<std::int64_t, HybridScore>> top_k_hybrid(
        const QuerySignature& query, std::size_t k, const HybridWeights& weights = {}) const {
        if (records_.empty()) throw Error(ErrorCode::InvalidInput, "pool is empty");
        if (k < 1) throw Error(ErrorCode::InvalidInput, "k must be >= 1");
        std::vector<std::int64_t> ids = ann_candidates(query.embedding, k * 20);
        std::vector<std::pair<std::int64_t, HybridScore>> scored;
        scored.reserve(ids.size());
        for (std::int64_t id : ids) {
            const Entry& e = entry_by_id(id);
            scored.emplace_back(id, hybrid(query, e.signature(), weights));
        }
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.second.combined != b.second.combined)
                return a.second.combined > b.second.combined;
            return a.first < b.first;
        });
        if (scored.size() > k) scored.resize(k);
        return scored;
    }

    /// Highest hybrid similarity between `query` and the current pool;
    /// 0 when the pool is empty.
    double max_neighbor_similarity(const QuerySignature& query, std::size_t k,
                                   const HybridWeights& weights = {}) const {
        if (records_.empty()) return 0.0;
        auto top = top_k_hybrid(query, k, weights);
        return top.empty() ? 0.0 : top.front().second.combined;
    }

    // ── export / import ─────────────────────────────────────────

    /// jsonl schema: {id, sql, tables, origin, round,
    /// features{joins,predicates,nesting,aggregates,tokens}, empty_result}
    int export_jsonl(const std::string& dest) const {
        std::ofstream out(dest, std::ios::trunc);
        if (!out) throw Error(ErrorCode::StorageError, "cannot write " + dest);
        for (const Entry& e : records_) out << record_json(e.record).dump() << "\n";
        return 1;
    }

    static constexpr const char* kCsvHeader =
        "id,origin,round,joins,predicates,nesting,aggregates,tokens,empty_result,tables,sql";

    int export_csv(const std::string& dest) const {
        std::ofstream out(dest, std::ios::trunc);
        if (!out) throw Error(ErrorCode::StorageError, "cannot write " + dest);
        out << kCsvHeader << "\n";
        for (const Entry& e : records_) {
            const SqlQueryRecord& r = e.record;
            out << r.id << ',' << origin_name(r.origin) << ',' << r.round << ','
                << r.features.join_count << ',' << r.features.predicate_count << ','
                << r.features.nesting_depth << ',' << r.features.aggregate_count << ','
                << r.features.token_length << ',' << (r.empty_result ? 1 : 0) << ','
                << csv_quote(join_tables(r.referenced_tables)) << ',' << csv_quote(r.sql_text)
                << "\n";
        }
        return 1;
    }

    int export_sql(const std::string& dest) const {
        std::ofstream out(dest, std::ios::trunc);
        if (!out) throw Error(ErrorCode::StorageError, "cannot write " + dest);
        for (const Entry& e : records_) out << e.record.sql_text << ";\n";
        return 1;
    }

    int export_pool(const std::string& format, const std::string& dest) const {
        if (records_.empty()) throw Error(ErrorCode::InvalidInput, "pool is empty");
        if (format == "jsonl") return export_jsonl(dest);
        if (format == "csv") return export_csv(dest);
        if (format == "sql" || format == "sql-file") return export_sql(dest);
        throw Error(ErrorCode::ConfigError, "unknown export format: " + format);
    }

    /// Rebuild pool contents from a jsonl export; embeddings are recomputed
    /// with `encoder`, acceptance-time metadata is reset.
    std::size_t import_jsonl(const std::string& source, const TextEncoder& encoder) {
        std::ifstream in(source);
        if (!in) throw Error(ErrorCode::NotFound, "cannot read " + source);
        std::size_t imported = 0;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line);
            SqlQueryRecord r;
            r.sql_text = j.at("sql").get<std::string>();
            r.normalized_text = sql::normalized_text(r.sql_text);
            for (const auto& t : j.at("tables")) r.referenced_tables.insert(t.get<std::string>());
            r.origin = origin_from_name(j.at("origin").get<std::string>());
            r.round = j.at("round").get<int>();
            const auto& f = j.at("features");
            r.features.join_count = f.at("joins").get<int>();
            r.features.predicate_count = f.at("predicates").get<int>();
            r.features.nesting_depth = f.at("nesting").get<int>();
            r.features.aggregate_count = f.at("aggregates").get<int>();
            r.features.token_length = f.at("tokens").get<int>();
            r.empty_result = j.at("empty_result").get<bool>();
            if (insert(r, encoder(r.sql_text)).inserted) ++imported;
        }
        return imported;
    }

    /// Content hash over (id, normalized_text) pairs; checkpoints use it to
    /// refuse resuming against the wrong pool.
    std::uint64_t content_hash() const {
        std::uint64_t h = 1469598103934665603ULL;
        for (const Entry& e : records_) {
            std::string part = std::to_string(e.record.id) + ':' + e.record.normalized_text + ';';
            h = detail::fnv1a64(reinterpret_cast<const unsigned char*>(part.data()), part.size(),
                                h);
        }
        return h;
    }

    /// Test instrumentation: invoked between the R write and the E write.
    void set_fault_hook(std::function<void()> hook) { fault_hook_ = std::move(hook); }

    /// Signature (tokens + AST + embedding) of a stored record.
    const QuerySignature& signature_of(std::int64_t id) const {
        return entry_by_id(id).signature();
    }

private:
    struct Entry {
        SqlQueryRecord record;
        std::vector<double> values;
        mutable std::optional<QuerySignature> cached_signature;

        const QuerySignature& signature() const {
            if (!cached_signature) {
                QuerySignature sig;
                sig.tokens = sql::tokenize(record.sql_text);
                sig.ast = sql::parse(record.sql_text);
                sig.embedding.query_id = record.id;
                sig.embedding.values = values;
                sig.embedding.norm = detail::l2_norm(values);
                cached_signature = std::move(sig);
            }
            return *cached_signature;
        }
    };

    std::string path_;
    int dim_;
    detail::DbHandle db_;
    std::unique_ptr<VectorIndex> index_;
    std::vector<Entry> records_;  // id order
    std::unordered_map<std::string, std::int64_t> normalized_index_;
    bool in_round_ = false;
    std::size_t round_start_size_ = 0;
    std::function<void()> fault_hook_;

    void init_schema() {
        detail::exec_or_throw(db_.get(), R"sql(
CREATE TABLE IF NOT EXISTS meta (key TEXT PRIMARY KEY, value TEXT);
CREATE TABLE IF NOT EXISTS r_queries (
  id INTEGER PRIMARY KEY,
  sql_text TEXT NOT NULL,
  normalized_text TEXT NOT NULL UNIQUE,
  referenced_tables TEXT NOT NULL,
  origin TEXT NOT NULL CHECK (origin IN ('GEN','EXP')),
  round INTEGER NOT NULL,
  joins INTEGER NOT NULL,
  predicates INTEGER NOT NULL,
  nesting INTEGER NOT NULL,
  aggregates INTEGER NOT NULL,
  tokens INTEGER NOT NULL,
  executable INTEGER NOT NULL CHECK (executable = 1),
  empty_result INTEGER NOT NULL,
  max_neighbor_sim REAL NOT NULL DEFAULT 0,
  created_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS e_embeddings (
  query_id INTEGER PRIMARY KEY REFERENCES r_queries(id),
  dim INTEGER NOT NULL,
  vec BLOB NOT NULL,
  norm REAL NOT NULL
);
)sql");
        detail::Stmt get_meta(db_.get(), "SELECT value FROM meta WHERE key='schema_version'");
        if (get_meta.step()) {
            detail::Stmt get_dim(db_.get(), "SELECT value FROM meta WHERE key='embedding_dim'");
            if (get_dim.step() && std::stoi(get_dim.column_text(0)) != dim_)
                throw Error(ErrorCode::DimensionMismatch,
                            "pool was created with embedding dim " + get_dim.column_text(0));
        } else {
            detail::Stmt put(db_.get(), "INSERT INTO meta VALUES ('schema_version', ?), "
                                        "('embedding_dim', ?)");
            put.bind(1, std::to_string(kPoolSchemaVersion)).bind(2, std::to_string(dim_));
            put.step_done();
        }
    }

    void load_mirror() {
        detail::Stmt stmt(db_.get(),
                          "SELECT r.id, r.sql_text, r.normalized_text, r.referenced_tables, "
                          "r.origin, r.round, r.joins, r.predicates, r.nesting, r.aggregates, "
                          "r.tokens, r.empty_result, r.max_neighbor_sim, r.created_at, e.vec "
                          "FROM r_queries r JOIN e_embeddings e ON e.query_id = r.id "
                          "ORDER BY r.id");
        while (stmt.step()) {
            Entry e;
            e.record.id = stmt.column_int64(0);
            e.record.sql_text = stmt.column_text(1);
            e.record.normalized_text = stmt.column_text(2);
            for (const auto& t : nlohmann::json::parse(stmt.column_text(3)))
                e.record.referenced_tables.insert(t.get<std::string>());
            e.record.origin = origin_from_name(stmt.column_text(4));
            e.record.round = static_cast<int>(stmt.column_int64(5));
            e.record.features.join_count = static_cast<int>(stmt.column_int64(6));
            e.record.features.predicate_count = static_cast<int>(stmt.column_int64(7));
            e.record.features.nesting_depth = static_cast<int>(stmt.column_int64(8));
            e.record.features.aggregate_count = static_cast<int>(stmt.column_int64(9));
            e.record.features.token_length = static_cast<int>(stmt.column_int64(10));
            e.record.executable = true;
            e.record.empty_result = stmt.column_int64(11) != 0;
            e.record.max_neighbor_similarity = stmt.column_double(12);
            e.record.created_at = stmt.column_text(13);
            const auto* blob = static_cast<const double*>(stmt.column_blob(14));
            std::size_t count = static_cast<std::size_t>(stmt.column_bytes(14)) / sizeof(double);
            if (static_cast<int>(count) != dim_)
                throw Error(ErrorCode::DimensionMismatch, "stored vector has wrong dimension");
            e.values.assign(blob, blob + count);
            normalized_index_.emplace(e.record.normalized_text, e.record.id);
            index_->add(e.record.id, e.values);
            records_.push_back(std::move(e));
        }
    }

    const Entry& entry_by_id(std::int64_t id) const {
        // ids are dense and insertion-ordered; binary search keeps this exact
        std::size_t lo = 0, hi = records_.size();
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (records_[mid].record.id < id) lo = mid + 1;
            else hi = mid;
        }
        if (lo < records_.size() && records_[lo].record.id == id) return records_[lo];
        throw Error(ErrorCode::NotFound, "no record with id " + std::to_string(id));
    }

    static nlohmann::json record_json(const SqlQueryRecord& r) {
        nlohmann::json tables = nlohmann::json::array();
        for (const std::string& t : r.referenced_tables) tables.push_back(t);
        return nlohmann::json{
            {"id", r.id},
            {"sql", r.sql_text},
            {"tables", tables},
            {"origin", origin_name(r.origin)},
            {"round", r.round},
            {"features",
             {{"joins", r.features.join_count},
              {"predicates", r.features.predicate_count},
              {"nesting", r.features.nesting_depth},
              {"aggregates", r.features.aggregate_count},
              {"tokens", r.features.token_length}}},
            {"empty_result", r.empty_result},
        };
    }

    static std::string join_tables(const std::set<std::string>& tables) {
        std::string out;
        for (const std::string& t : tables) {
            if (!out.empty()) out += ' ';
            out += t;
        }
        return out;
    }

    static std::string csv_quote(const std::string& s) {
        std::string out = "\"";
        for (char c : s) {
            out.push_back(c);
            if (c == '"') out.push_back('"');
        }
        out.push_back('"');
        return out;
    }

    static std::string now_utc() {
        std::time_t t = std::time(nullptr);
        char buf[32];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
        return buf;
    }
};

/// Build a full record + signature from raw SQL: parse, normalize, analyze,
/// encode. The executable/empty flags still come from the harness.
struct AnalyzedQuery {
    SqlQueryRecord record;
    QuerySignature signature;
};

inline AnalyzedQuery analyze_query(const std::string& sql_text, Origin origin, int round,
                                   const TextEncoder& encoder) {
    AnalyzedQuery out;
    out.signature.ast = sql::parse(sql_text);
    out.signature.tokens = sql::tokenize(sql_text);
    out.signature.embedding = encoder(sql_text);
    out.record.sql_text = sql_text;
    out.record.normalized_text = sql::render(out.signature.ast);
    out.record.referenced_tables = sql::referenced_tables(out.signature.ast);
    out.record.origin = origin;
    out.record.round = round;
    out.record.features = sql::structural_features(out.signature.ast);
    return out;
}

}  // namespace sqlsynth
