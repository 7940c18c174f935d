// Copyright 2026 The sqlsynth Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "sqlsynth/detail/sqlite_util.hpp"
#include "sqlsynth/error.hpp"

namespace sqlsynth {

// The execution tool: runs candidate queries read-only against the target
// database, classifies failures, and flags empty result sets. Execution is
// capped by a wall-clock timeout and a row-fetch cap; hitting the cap still
// counts as executable.

enum class ExecErrorClass {
    None,
    Syntax,
    MissingRelation,
    MissingColumn,
    TypeMismatch,
    Timeout,
    Other,
};

inline const char* exec_error_class_name(ExecErrorClass c) {
    switch (c) {
        case ExecErrorClass::None: return "none";
        case ExecErrorClass::Syntax: return "syntax";
        case ExecErrorClass::MissingRelation: return "missing-relation";
        case ExecErrorClass::MissingColumn: return "missing-column";
        case ExecErrorClass::TypeMismatch: return "type-mismatch";
        case ExecErrorClass::Timeout: return "timeout";
        case ExecErrorClass::Other: return "other";
    }
    return "?";
}

struct ExecVerdict {
    bool executable = false;
    ExecErrorClass error_class = ExecErrorClass::Other;
    std::string error_message;
    bool empty_result = false;
    std::int64_t row_count = 0;
    std::chrono::microseconds elapsed{0};
};

struct ExecOptions {
    std::chrono::milliseconds timeout{5000};
    std::int64_t row_cap = 10000;
    int parallelism = 4;
};

namespace detail {

inline ExecErrorClass classify_sqlite_error(const std::string& msg) {
    if (msg.find("no such table") != std::string::npos) return ExecErrorClass::MissingRelation;
    if (msg.find("no such column") != std::string::npos) return ExecErrorClass::MissingColumn;
    if (msg.find("syntax error") != std::string::npos ||
        msg.find("incomplete input") != std::string::npos)
        return ExecErrorClass::Syntax;
    if (msg.find("datatype mismatch") != std::string::npos)
        return ExecErrorClass::TypeMismatch;
    if (msg.find("interrupted") != std::string::npos) return ExecErrorClass::Timeout;
    return ExecErrorClass::Other;
}

struct Deadline {
    std::chrono::steady_clock::time_point at;
    bool expired() const { return std::chrono::steady_clock::now() >= at; }
};

}  // namespace detail

class ExecHarness {
public:
    explicit ExecHarness(std::string db_path, ExecOptions options = {})
        : db_path_(std::move(db_path)), options_(options) {}

    const std::string& db_path() const { return db_path_; }
    const ExecOptions& options() const { return options_; }

    /// Validate one query. Failure to reach the database throws; query
    /// failures come back in the verdict.
    ExecVerdict check(std::string_view sql) const {
        detail::DbHandle db = open_connection();
        return check_on(db.get(), sql);
    }

    /// Validate a batch, preserving input order. Each query is isolated;
    /// one failure never aborts the batch.
    std::vector<ExecVerdict> check_batch(const std::vector<std::string>& queries) const {
        std::vector<ExecVerdict> verdicts(queries.size());
        if (queries.empty()) return verdicts;
        int workers = std::max(1, std::min<int>(options_.parallelism,
                                                static_cast<int>(queries.size())));
        if (workers == 1) {
            detail::DbHandle db = open_connection();
            for (std::size_t i = 0; i < queries.size(); ++i)
                verdicts[i] = check_on(db.get(), queries[i]);
            return verdicts;
        }
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            threads.emplace_back([&] {
                detail::DbHandle db = open_connection();
                while (true) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= queries.size()) break;
                    verdicts[i] = check_on(db.get(), queries[i]);
                }
            });
        }
        for (std::thread& t : threads) t.join();
        return verdicts;
    }

private:
    std::string db_path_;
    ExecOptions options_;

    detail::DbHandle open_connection() const {
        detail::DbHandle db;
        try {
            db = detail::DbHandle::open(db_path_, SQLITE_OPEN_READONLY);
        } catch (const Error& e) {
            throw Error(ErrorCode::HarnessError, e.what());
        }
        detail::exec_or_throw(db.get(), "PRAGMA query_only=ON");
        sqlite3_busy_timeout(db.get(), 2000);
        return db;
    }

    ExecVerdict check_on(sqlite3* db, std::string_view sql) const {
        ExecVerdict v;
        auto start = std::chrono::steady_clock::now();
        detail::Deadline deadline{start + options_.timeout};

        sqlite3_stmt* raw = nullptr;
        const char* tail = nullptr;
        int rc = sqlite3_prepare_v2(db, sql.data(), static_cast<int>(sql.size()), &raw, &tail);
        if (rc != SQLITE_OK) {
            v.error_message = sqlite3_errmsg(db);
            v.error_class = detail::classify_sqlite_error(v.error_message);
            v.elapsed = since(start);
            return v;
        }
        struct Finalizer {
            sqlite3_stmt* s;
            ~Finalizer() {
                if (s) sqlite3_finalize(s);
            }
        } fin{raw};

        if (!raw) {
            v.error_class = ExecErrorClass::Other;
            v.error_message = "empty statement";
            v.elapsed = since(start);
            return v;
        }
        if (tail && has_more_statements(tail, sql.data() + sql.size())) {
            v.error_class = ExecErrorClass::Other;
            v.error_message = "multiple statements";
            v.elapsed = since(start);
            return v;
        }
        if (!sqlite3_stmt_readonly(raw)) {
            v.error_class = ExecErrorClass::Other;
            v.error_message = "write statement rejected";
            v.elapsed = since(start);
            return v;
        }

        sqlite3_progress_handler(
            db, 1000,
            [](void* ctx) -> int { return static_cast<detail::Deadline*>(ctx)->expired() ? 1 : 0; },
            &deadline);

        std::int64_t rows = 0;
        while (true) {
            if (rows >= options_.row_cap) break;
            int step_rc = sqlite3_step(raw);
            if (step_rc == SQLITE_ROW) {
                ++rows;
                continue;
            }
            if (step_rc == SQLITE_DONE) break;
            v.error_message = sqlite3_errmsg(db);
            v.error_class = deadline.expired() ? ExecErrorClass::Timeout
                                               : detail::classify_sqlite_error(v.error_message);
            sqlite3_progress_handler(db, 0, nullptr, nullptr);
            v.elapsed = since(start);
            return v;
        }
        sqlite3_progress_handler(db, 0, nullptr, nullptr);

        v.executable = true;
        v.error_class = ExecErrorClass::None;
        v.row_count = rows;
        v.empty_result = rows == 0;
        v.elapsed = since(start);
        return v;
    }

    static bool has_more_statements(const char* tail, const char* end) {
        for (const char* p = tail; p < end; ++p) {
            char c = *p;
            if (c == ';' || std::isspace(static_cast<unsigned char>(c))) continue;
            return true;
        }
        return false;
    }

    static std::chrono::microseconds since(std::chrono::steady_clock::time_point start) {
        return std::chrono::duration_cast<std::chrono::microseconds>(
            std::chrono::steady_clock::now() - start);
    }
};

}  // namespace sqlsynth
