// Copyright 2026 The sqlsynth Authors
// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "sqlsynth/exec.hpp"
#include "support/toy_db.hpp"

using namespace sqlsynth;

namespace {

std::string toy_path() {
    static std::string path = [] {
        std::string p = (std::filesystem::temp_directory_path() / "sqlsynth_exec_toy.db").string();
        testing::create_toy_db(p);
        return p;
    }();
    return path;
}

}  // namespace

TEST_CASE("trivial select is executable with one row") {
    ExecHarness harness(toy_path());
    ExecVerdict v = harness.check("SELECT 1");
    CHECK(v.executable);
    CHECK(v.error_class == ExecErrorClass::None);
    CHECK(v.row_count == 1);
    CHECK_FALSE(v.empty_result);
}

TEST_CASE("missing relation is classified") {
    ExecHarness harness(toy_path());
    ExecVerdict v = harness.check("SELECT * FROM missing_table");
    CHECK_FALSE(v.executable);
    CHECK(v.error_class == ExecErrorClass::MissingRelation);
}

TEST_CASE("missing column and syntax errors are classified") {
    ExecHarness harness(toy_path());
    CHECK(harness.check("SELECT nope FROM orders").error_class == ExecErrorClass::MissingColumn);
    CHECK(harness.check("SELEKT 1").error_class == ExecErrorClass::Syntax);
}

TEST_CASE("empty result set is flagged") {
    ExecHarness harness(toy_path());
    ExecVerdict v = harness.check("SELECT * FROM orders WHERE 1=0");
    CHECK(v.executable);
    CHECK(v.empty_result);
    CHECK(v.row_count == 0);
}

TEST_CASE("write statements are rejected before execution") {
    ExecHarness harness(toy_path());
    ExecVerdict v = harness.check("DELETE FROM orders");
    CHECK_FALSE(v.executable);
    CHECK(v.error_message.find("write") != std::string::npos);
    // table untouched
    CHECK(harness.check("SELECT * FROM orders").row_count > 0);
    CHECK_FALSE(harness.check("INSERT INTO regions VALUES (99, 'x', 1)").executable);
    CHECK_FALSE(harness.check("DROP TABLE orders").executable);
}

TEST_CASE("multiple statements are rejected") {
    ExecHarness harness(toy_path());
    ExecVerdict v = harness.check("SELECT 1; SELECT 2");
    CHECK_FALSE(v.executable);
    CHECK(v.error_message.find("multiple") != std::string::npos);
    // a single trailing semicolon is fine
    CHECK(harness.check("SELECT 1;").executable);
}

TEST_CASE("row cap still counts as executable") {
    ExecOptions opts;
    opts.row_cap = 10;
    ExecHarness harness(toy_path(), opts);
    ExecVerdict v = harness.check("SELECT * FROM order_lines");
    CHECK(v.executable);
    CHECK(v.row_count == 10);
    CHECK_FALSE(v.empty_result);
}

TEST_CASE("timeout interrupts runaway queries") {
    ExecOptions opts;
    opts.timeout = std::chrono::milliseconds(150);
    opts.row_cap = 100000000;
    ExecHarness harness(toy_path(), opts);
    // cartesian blowup over four tables; far beyond 150ms of stepping
    ExecVerdict v = harness.check(
        "SELECT COUNT(*) FROM order_lines a, order_lines b, order_lines c, orders d "
        "WHERE a.qty + b.qty + c.qty + d.total > 0");
    CHECK_FALSE(v.executable);
    CHECK(v.error_class == ExecErrorClass::Timeout);
}

TEST_CASE("unreachable database throws a harness error") {
    ExecHarness harness("/nonexistent/dir/noop.db");
    try {
        harness.check("SELECT 1");
        FAIL("expected harness error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::HarnessError);
    }
}

TEST_CASE("batch verdicts preserve input order") {
    ExecHarness harness(toy_path());
    std::vector<std::string> batch = {
        "SELECT 1",
        "SELECT * FROM missing_table",
        "SELECT COUNT(*) FROM orders",
    };
    auto verdicts = harness.check_batch(batch);
    REQUIRE(verdicts.size() == 3);
    CHECK(verdicts[0].executable);
    CHECK_FALSE(verdicts[1].executable);
    CHECK(verdicts[2].executable);
    CHECK(harness.check_batch({}).empty());
}

TEST_CASE("parallel batch equals the serial run") {
    std::vector<std::string> batch;
    for (int i = 0; i < 40; ++i) {
        switch (i % 4) {
            case 0: batch.push_back("SELECT COUNT(*) FROM orders WHERE total > " +
                                    std::to_string(i * 20)); break;
            case 1: batch.push_back("SELECT * FROM ghost_" + std::to_string(i)); break;
            case 2: batch.push_back("SELECT name FROM customers WHERE age > " +
                                    std::to_string(18 + i)); break;
            default: batch.push_back("SELECT * FROM orders WHERE 1=0"); break;
        }
    }
    ExecOptions serial_opts;
    serial_opts.parallelism = 1;
    ExecOptions parallel_opts;
    parallel_opts.parallelism = 4;
    auto serial = ExecHarness(toy_path(), serial_opts).check_batch(batch);
    auto parallel = ExecHarness(toy_path(), parallel_opts).check_batch(batch);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].executable == parallel[i].executable);
        CHECK(serial[i].error_class == parallel[i].error_class);
        CHECK(serial[i].row_count == parallel[i].row_count);
        CHECK(serial[i].empty_result == parallel[i].empty_result);
    }
}

TEST_CASE("repeated checks of the same query agree") {
    ExecHarness harness(toy_path());
    ExecVerdict a = harness.check("SELECT name FROM customers WHERE age > 40 ORDER BY id");
    ExecVerdict b = harness.check("SELECT name FROM customers WHERE age > 40 ORDER BY id");
    CHECK(a.executable == b.executable);
    CHECK(a.row_count == b.row_count);
    CHECK(a.empty_result == b.empty_result);
}
