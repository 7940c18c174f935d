// Copyright 2026 The sqlsynth Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <sqlite3.h>

#include <string>
#include <string_view>

#include "sqlsynth/error.hpp"

namespace sqlsynth::detail {

/// RAII wrapper for sqlite3*.
class DbHandle {
public:
    DbHandle() = default;
    explicit DbHandle(sqlite3* db) : db_(db) {}
    ~DbHandle() { close(); }

    DbHandle(const DbHandle&) = delete;
    DbHandle& operator=(const DbHandle&) = delete;
    DbHandle(DbHandle&& o) noexcept : db_(o.db_) { o.db_ = nullptr; }
    DbHandle& operator=(DbHandle&& o) noexcept {
        if (this != &o) {
            close();
            db_ = o.db_;
            o.db_ = nullptr;
        }
        return *this;
    }

    sqlite3* get() const { return db_; }
    explicit operator bool() const { return db_ != nullptr; }

    void close() {
        if (db_) {
            sqlite3_close_v2(db_);
            db_ = nullptr;
        }
    }

    static DbHandle open(const std::string& path, int flags) {
        sqlite3* raw = nullptr;
        if (sqlite3_open_v2(path.c_str(), &raw, flags, nullptr) != SQLITE_OK) {
            std::string msg = raw ? sqlite3_errmsg(raw) : "out of memory";
            sqlite3_close_v2(raw);
            throw Error(ErrorCode::StorageError, "cannot open database '" + path + "': " + msg);
        }
        return DbHandle(raw);
    }

    static DbHandle open_memory() {
        return open(":memory:", SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE);
    }

private:
    sqlite3* db_ = nullptr;
};

/// RAII wrapper for sqlite3_stmt*.
class Stmt {
public:
    Stmt() = default;
    Stmt(sqlite3* db, std::string_view sql) : db_(db) {
        if (sqlite3_prepare_v2(db, sql.data(), static_cast<int>(sql.size()), &stmt_, nullptr) !=
            SQLITE_OK)
            throw Error(ErrorCode::StorageError,
                        std::string("prepare failed: ") + sqlite3_errmsg(db));
    }
    ~Stmt() {
        if (stmt_) sqlite3_finalize(stmt_);
    }

    Stmt(const Stmt&) = delete;
    Stmt& operator=(const Stmt&) = delete;
    Stmt(Stmt&& o) noexcept : db_(o.db_), stmt_(o.stmt_) { o.stmt_ = nullptr; }
    Stmt& operator=(Stmt&& o) noexcept {
        if (this != &o) {
            if (stmt_) sqlite3_finalize(stmt_);
            db_ = o.db_;
            stmt_ = o.stmt_;
            o.stmt_ = nullptr;
        }
        return *this;
    }

    sqlite3_stmt* get() const { return stmt_; }

    Stmt& bind(int index, std::int64_t value) {
        sqlite3_bind_int64(stmt_, index, value);
        return *this;
    }
    Stmt& bind(int index, double value) {
        sqlite3_bind_double(stmt_, index, value);
        return *this;
    }
    Stmt& bind(int index, std::string_view value) {
        sqlite3_bind_text(stmt_, index, value.data(), static_cast<int>(value.size()),
                          SQLITE_TRANSIENT);
        return *this;
    }
    Stmt& bind_blob(int index, const void* data, std::size_t size) {
        sqlite3_bind_blob(stmt_, index, data, static_cast<int>(size), SQLITE_TRANSIENT);
        return *this;
    }

    /// True while rows remain.
    bool step() {
        int rc = sqlite3_step(stmt_);
        if (rc == SQLITE_ROW) return true;
        if (rc == SQLITE_DONE) return false;
        throw Error(ErrorCode::StorageError, std::string("step failed: ") + sqlite3_errmsg(db_));
    }

    void step_done() {
        if (step())
            throw Error(ErrorCode::StorageError, "statement unexpectedly returned rows");
    }

    std::int64_t column_int64(int col) const { return sqlite3_column_int64(stmt_, col); }
    double column_double(int col) const { return sqlite3_column_double(stmt_, col); }
    std::string column_text(int col) const {
        const unsigned char* p = sqlite3_column_text(stmt_, col);
        return p ? reinterpret_cast<const char*>(p) : "";
    }
    bool column_null(int col) const { return sqlite3_column_type(stmt_, col) == SQLITE_NULL; }
    const void* column_blob(int col) const { return sqlite3_column_blob(stmt_, col); }
    int column_bytes(int col) const { return sqlite3_column_bytes(stmt_, col); }

private:
    sqlite3* db_ = nullptr;
    sqlite3_stmt* stmt_ = nullptr;
};

inline void exec_or_throw(sqlite3* db, const char* sql) {
    char* err = nullptr;
    if (sqlite3_exec(db, sql, nullptr, nullptr, &err) != SQLITE_OK) {
        std::string msg = err ? err : "unknown error";
        sqlite3_free(err);
        throw Error(ErrorCode::StorageError, msg);
    }
}

}  // namespace sqlsynth::detail
