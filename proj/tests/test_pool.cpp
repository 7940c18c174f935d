// Copyright 2026 The sqlsynth Authors
// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>

#include "sqlsynth/pool.hpp"
#include "support/synthetic.hpp"
#include "support/toy_db.hpp"

using namespace sqlsynth;

namespace {

std::string fresh_pool_path(const char* name) {
    auto path = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove(path);
    std::error_code ec;
    std::filesystem::remove(std::filesystem::path(path.string() + "-wal"), ec);
    std::filesystem::remove(std::filesystem::path(path.string() + "-shm"), ec);
    return path.string();
}

AnalyzedQuery make_query(std::size_t i, Origin origin = Origin::Gen) {
    static TextEncoder encoder = make_fallback_encoder();
    AnalyzedQuery q = analyze_query(testing::synthetic_query(i), origin, 0, encoder);
    q.record.executable = true;
    return q;
}

void fill_pool(SqlPool& pool, std::size_t n, double exp_fraction = 0.0) {
    pool.begin_round();
    for (std::size_t i = 0; i < n; ++i) {
        Origin origin =
            (exp_fraction > 0 && (i % 100) < exp_fraction * 100) ? Origin::Exp : Origin::Gen;
        AnalyzedQuery q = make_query(i, origin);
        REQUIRE(pool.insert(q.record, q.signature.embedding).inserted);
    }
    pool.commit_round();
}

}  // namespace

TEST_CASE("insert grows the pool and assigns dense ids") {
    SqlPool pool(fresh_pool_path("pool_basic.db"));
    AnalyzedQuery q = make_query(0);
    InsertResult r = pool.insert(q.record, q.signature.embedding);
    CHECK(r.inserted);
    CHECK(r.id == 1);
    CHECK(pool.size() == 1);
    CHECK(pool.get(1).sql_text == q.record.sql_text);
}

TEST_CASE("exact duplicates by normalized text are rejected") {
    SqlPool pool(fresh_pool_path("pool_dup.db"));
    AnalyzedQuery q = make_query(1);
    REQUIRE(pool.insert(q.record, q.signature.embedding).inserted);

    // same structure, different literal and case → same normalized text
    AnalyzedQuery variant = q;
    InsertResult r = pool.insert(variant.record, variant.signature.embedding);
    CHECK_FALSE(r.inserted);
    CHECK(r.id == 1);
    CHECK(pool.size() == 1);
}

TEST_CASE("non-executable records and wrong dimensions are refused") {
    SqlPool pool(fresh_pool_path("pool_guard.db"));
    AnalyzedQuery q = make_query(2);
    q.record.executable = false;
    CHECK_THROWS_AS(pool.insert(q.record, q.signature.embedding), Error);
    q.record.executable = true;
    EmbeddingVector wrong;
    wrong.values.assign(10, 0.5);
    CHECK_THROWS_AS(pool.insert(q.record, wrong), Error);
    CHECK(pool.size() == 0);
}

TEST_CASE("fault between R and E writes leaves no orphan rows") {
    std::string path = fresh_pool_path("pool_fault.db");
    {
        SqlPool pool(path);
        AnalyzedQuery q0 = make_query(3);
        REQUIRE(pool.insert(q0.record, q0.signature.embedding).inserted);

        pool.set_fault_hook([] { throw std::runtime_error("injected crash"); });
        AnalyzedQuery q1 = make_query(4);
        CHECK_THROWS(pool.insert(q1.record, q1.signature.embedding));
        pool.set_fault_hook(nullptr);
        CHECK(pool.size() == 1);
        // the failed insert must be retryable
        CHECK(pool.insert(q1.record, q1.signature.embedding).inserted);
    }
    // recovery: reload from disk, rows in R match rows in E
    SqlPool reopened(path);
    CHECK(reopened.size() == 2);
}

TEST_CASE("round rollback rewinds storage, mirror, and index") {
    std::string path = fresh_pool_path("pool_round.db");
    SqlPool pool(path);
    AnalyzedQuery q0 = make_query(5);
    REQUIRE(pool.insert(q0.record, q0.signature.embedding).inserted);

    pool.begin_round();
    AnalyzedQuery q1 = make_query(6);
    AnalyzedQuery q2 = make_query(7);
    REQUIRE(pool.insert(q1.record, q1.signature.embedding).inserted);
    REQUIRE(pool.insert(q2.record, q2.signature.embedding).inserted);
    CHECK(pool.size() == 3);
    pool.rollback_round();
    CHECK(pool.size() == 1);
    CHECK_FALSE(pool.find_normalized(q1.record.normalized_text).has_value());

    // rolled-back rows can be inserted again
    pool.begin_round();
    CHECK(pool.insert(q1.record, q1.signature.embedding).inserted);
    pool.commit_round();

    SqlPool reopened(path);
    CHECK(reopened.size() == 2);
}

TEST_CASE("stats_per_table zero-fills and matches a full recount") {
    SqlPool pool(fresh_pool_path("pool_stats.db"));
    DatabaseSchema schema = ingest_ddl("toy", testing::toy_schema_sql());

    auto empty_stats = pool.stats_per_table(schema);
    CHECK(empty_stats.size() == schema.tables.size());
    for (const auto& [table, count] : empty_stats) CHECK(count == 0);

    fill_pool(pool, 300);
    auto stats = pool.stats_per_table(schema);

    // brute-force recount straight from the records
    std::map<std::string, std::int64_t> recount;
    for (const TableSchema& t : schema.tables) recount[t.name] = 0;
    pool.for_each([&](const SqlQueryRecord& r) {
        for (const std::string& t : r.referenced_tables)
            if (recount.count(t)) ++recount[t];
    });
    CHECK(stats == recount);

    std::int64_t total = 0;
    for (const auto& [table, count] : stats) total += count;
    CHECK(total >= static_cast<std::int64_t>(pool.size()));
}

TEST_CASE("expansion ratio counts EXP-origin records") {
    SqlPool pool(fresh_pool_path("pool_ratio.db"));
    ExpansionRatio empty = pool.expansion_ratio();
    CHECK(empty.empty_pool);
    CHECK(empty.ratio == 0.0);

    fill_pool(pool, 100, 0.6);
    ExpansionRatio r = pool.expansion_ratio();
    CHECK_FALSE(r.empty_pool);
    CHECK(r.ratio == Catch::Approx(0.6));
}

TEST_CASE("ann candidates equal a brute-force cosine scan") {
    SqlPool pool(fresh_pool_path("pool_ann.db"));
    fill_pool(pool, 1000);

    EmbeddingVector probe = fallback_encode(testing::synthetic_query(77));
    auto got = pool.ann_candidates(probe, 50);
    REQUIRE(got.size() == 50);

    // oracle: score every record directly
    std::vector<std::pair<double, std::int64_t>> scored;
    pool.for_each([&](const SqlQueryRecord& r) {
        const QuerySignature& sig = pool.signature_of(r.id);
        scored.emplace_back(sim_emb(probe, sig.embedding), r.id);
    });
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t i = 0; i < 50; ++i) CHECK(got[i] == scored[i].second);

    // undersized pool returns everything
    SqlPool small(fresh_pool_path("pool_ann_small.db"));
    fill_pool(small, 5);
    CHECK(small.ann_candidates(probe, 200).size() == 5);
}

TEST_CASE("top_k_hybrid equals full-pairwise brute force") {
    SqlPool pool(fresh_pool_path("pool_topk.db"));
    fill_pool(pool, 600);

    AnalyzedQuery probe = make_query(123);  // same family as pooled queries
    auto got = pool.top_k_hybrid(probe.signature, 10);
    REQUIRE(got.size() == 10);

    HybridWeights w;
    std::vector<std::pair<std::int64_t, HybridScore>> brute;
    pool.for_each([&](const SqlQueryRecord& r) {
        brute.emplace_back(r.id, hybrid(probe.signature, pool.signature_of(r.id), w));
    });
    std::sort(brute.begin(), brute.end(), [](const auto& a, const auto& b) {
        if (a.second.combined != b.second.combined) return a.second.combined > b.second.combined;
        return a.first < b.first;
    });
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].first == brute[i].first);
        CHECK(got[i].second.combined == Catch::Approx(brute[i].second.combined).margin(1e-12));
    }
    // descending order
    for (std::size_t i = 1; i < got.size(); ++i)
        CHECK(got[i - 1].second.combined >= got[i].second.combined);
}

TEST_CASE("a pooled record retrieves itself first with combined 1.0") {
    SqlPool pool(fresh_pool_path("pool_self.db"));
    fill_pool(pool, 50);
    const QuerySignature& sig = pool.signature_of(25);
    auto top = pool.top_k_hybrid(sig, 1);
    REQUIRE(top.size() == 1);
    CHECK(top[0].first == 25);
    CHECK(top[0].second.combined == 1.0);
}

TEST_CASE("ivf index plug-in reaches recall@10 >= 0.95") {
    std::string exact_path = fresh_pool_path("pool_ivf_exact.db");
    std::string ivf_path = fresh_pool_path("pool_ivf.db");
    SqlPool exact(exact_path);
    SqlPool approx(ivf_path, kDefaultEmbeddingDim, std::make_unique<IvfFlatIndex>());
    exact.begin_round();
    approx.begin_round();
    for (std::size_t i = 0; i < 2000; ++i) {
        AnalyzedQuery q = make_query(i);
        REQUIRE(exact.insert(q.record, q.signature.embedding).inserted);
        REQUIRE(approx.insert(q.record, q.signature.embedding).inserted);
    }
    exact.commit_round();
    approx.commit_round();

    double hits = 0, total = 0;
    for (std::size_t probe_i = 0; probe_i < 40; ++probe_i) {
        EmbeddingVector probe = fallback_encode(testing::synthetic_query(5000 + probe_i * 13));
        auto truth = exact.ann_candidates(probe, 10);
        auto got = approx.ann_candidates(probe, 10);
        std::set<std::int64_t> truth_set(truth.begin(), truth.end());
        for (std::int64_t id : got)
            if (truth_set.count(id)) ++hits;
        total += static_cast<double>(truth.size());
    }
    CHECK(hits / total >= 0.95);
}

TEST_CASE("jsonl export round-trips into an identical pool") {
    std::string src_path = fresh_pool_path("pool_export_src.db");
    std::string dst_path = fresh_pool_path("pool_export_dst.db");
    std::string jsonl = fresh_pool_path("pool_export.jsonl");
    SqlPool source(src_path);
    fill_pool(source, 60, 0.3);
    CHECK(source.export_pool("jsonl", jsonl) == 1);

    {
        std::ifstream in(jsonl);
        std::string line;
        std::size_t lines = 0;
        while (std::getline(in, line))
            if (!line.empty()) ++lines;
        CHECK(lines == 60);
    }

    SqlPool dest(dst_path);
    CHECK(dest.import_jsonl(jsonl, make_fallback_encoder()) == 60);
    std::string again = fresh_pool_path("pool_export_again.jsonl");
    dest.export_pool("jsonl", again);

    std::ifstream a(jsonl), b(again);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
}

TEST_CASE("csv export carries the documented header") {
    SqlPool pool(fresh_pool_path("pool_csv.db"));
    fill_pool(pool, 3);
    std::string csv_path = fresh_pool_path("pool_csv_out.csv");
    pool.export_pool("csv", csv_path);
    std::ifstream in(csv_path);
    std::string header;
    std::getline(in, header);
    CHECK(header ==
          "id,origin,round,joins,predicates,nesting,aggregates,tokens,empty_result,tables,sql");
}

TEST_CASE("export of an empty pool is refused") {
    SqlPool pool(fresh_pool_path("pool_empty_export.db"));
    CHECK_THROWS_AS(pool.export_pool("jsonl", "/tmp/should_not_exist.jsonl"), Error);
    CHECK_THROWS_AS(pool.export_pool("bogus-format", "/tmp/x"), Error);
}

TEST_CASE("pool persists across reopen with identical content hash") {
    std::string path = fresh_pool_path("pool_reopen.db");
    std::uint64_t hash_before;
    {
        SqlPool pool(path);
        fill_pool(pool, 40);
        hash_before = pool.content_hash();
    }
    SqlPool reopened(path);
    CHECK(reopened.size() == 40);
    CHECK(reopened.content_hash() == hash_before);
    CHECK_THROWS_AS(SqlPool(path, 128), Error);  // dimension mismatch on reopen
}

TEST_CASE("stored records re-derive their own features") {
    SqlPool pool(fresh_pool_path("pool_consistency.db"));
    fill_pool(pool, 80);
    pool.for_each([&](const SqlQueryRecord& r) {
        sql::QueryAst ast = sql::parse(r.sql_text);
        CHECK(sql::structural_features(ast) == r.features);
        CHECK(sql::referenced_tables(ast) == r.referenced_tables);
        CHECK(sql::render(ast) == r.normalized_text);
    });
}
