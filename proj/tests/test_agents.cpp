// Copyright 2026 The sqlsynth Authors
// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "sqlsynth/agents.hpp"
#include "support/synthetic.hpp"
#include "support/toy_db.hpp"

using namespace sqlsynth;

namespace {

std::string fresh_path(const char* name) {
    auto p = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove(p);
    return p.string();
}

std::string toy_db_path() {
    static std::string path = [] {
        std::string p = fresh_path("sqlsynth_agents_toy.db");
        testing::create_toy_db(p);
        return p;
    }();
    return path;
}

DatabaseSchema toy_schema() { return ingest_ddl("toy", testing::toy_schema_sql()); }

/// Backend capturing the requests it answers.
class CapturingBackend final : public CompletionBackend {
public:
    explicit CapturingBackend(std::string response) : response_(std::move(response)) {}

    CompletionResponse complete(const CompletionRequest& request, std::uint64_t) override {
        last_request = request;
        ++calls;
        return {response_};
    }

    CompletionRequest last_request;
    int calls = 0;

private:
    std::string response_;
};

void fill_pool(SqlPool& pool, std::size_t n, Origin origin = Origin::Gen) {
    static TextEncoder encoder = make_fallback_encoder();
    pool.begin_round();
    for (std::size_t i = 0; i < n; ++i) {
        AnalyzedQuery q = analyze_query(testing::synthetic_query(i), origin, 0, encoder);
        REQUIRE(pool.insert(q.record, q.signature.embedding).inserted);
    }
    pool.commit_round();
}

}  // namespace

TEST_CASE("table_select returns the scripted model's valid tables") {
    DatabaseSchema schema = ingest_ddl("star", testing::star_schema_sql());
    auto scripted = std::make_shared<ScriptedBackend>();
    scripted->add_sequence(ModelRole::Reasoner, {"store_sales\nitem\n"});
    LlmGateway gateway;
    gateway.set_backend(ModelRole::Reasoner, scripted);

    std::set<std::string> chosen = table_select(gateway, schema, {}, 2);
    CHECK(chosen == std::set<std::string>{"store_sales", "item"});
}

TEST_CASE("table_select drops hallucinated names and fills deterministically") {
    DatabaseSchema schema = ingest_ddl("star", testing::star_schema_sql());
    auto scripted = std::make_shared<ScriptedBackend>();
    scripted->add_sequence(ModelRole::Reasoner, {"orders99\nstore\n"});
    LlmGateway gateway;
    gateway.set_backend(ModelRole::Reasoner, scripted);

    std::set<std::string> chosen = table_select(gateway, schema, {}, 3);
    CHECK(chosen.size() == 3);
    CHECK(chosen.count("store") == 1);
    CHECK(chosen.count("orders99") == 0);
    // fallback picks the top coverage-gap tables
    auto ranked = rank_tables_by_coverage_gap(schema, {});
    CHECK(chosen.count(ranked[0]) == 1);
}

TEST_CASE("empty-pool fallback ranks purely by complexity") {
    DatabaseSchema schema = ingest_ddl("star", testing::star_schema_sql());
    auto ranked = rank_tables_by_coverage_gap(schema, {});

    // oracle: sort profiles by complexity, ties by name
    std::vector<TableProfile> profiles = profile_all_tables(schema, {});
    std::sort(profiles.begin(), profiles.end(), [](const TableProfile& a, const TableProfile& b) {
        if (a.complexity != b.complexity) return a.complexity > b.complexity;
        return a.table < b.table;
    });
    for (std::size_t i = 0; i < profiles.size(); ++i) CHECK(ranked[i] == profiles[i].table);
    CHECK(ranked[0] == "store_sales");
}

TEST_CASE("coverage ranking prefers uncovered tables at equal complexity") {
    DatabaseSchema schema = ingest_ddl(
        "pair",
        "CREATE TABLE twin_a (x INTEGER, y INTEGER);CREATE TABLE twin_b (x INTEGER, y INTEGER);");
    auto ranked = rank_tables_by_coverage_gap(schema, {{"twin_a", 50}, {"twin_b", 1}});
    CHECK(ranked[0] == "twin_b");
}

TEST_CASE("generate keeps parseable candidates and passes temperature 0.8") {
    DatabaseSchema schema = toy_schema();
    std::string transcript =
        "```sql\n"
        "SELECT o.id, c.name FROM orders o JOIN customers c ON o.customer_id = c.id;\n"
        "SELECT city, COUNT(*) FROM customers GROUP BY city;\n"
        "SELECT * FROM orders WHERE total > 100 AND status = 'open';\n"
        "SELECT FROM WHERE broken;\n"
        "SELECT p.category, AVG(p.price) FROM products p GROUP BY p.category;\n"
        "```";
    auto capturing = std::make_shared<CapturingBackend>(transcript);
    LlmGateway gateway;
    gateway.set_backend(ModelRole::Generator, capturing);

    CandidateBatch batch = generate(gateway, schema, {"orders", "customers", "products"}, {}, 5);
    CHECK(batch.candidates.size() == 4);
    CHECK(batch.dropped_unparseable == 1);
    CHECK(capturing->last_request.temperature == 0.8);
    CHECK(capturing->last_request.role == ModelRole::Generator);

    // all candidates reference only catalog tables
    for (const std::string& sql_text : batch.candidates) {
        for (const std::string& t : sql::referenced_tables(sql::parse(sql_text)))
            CHECK(schema.find_table(t) != nullptr);
    }
}

TEST_CASE("generate retries an empty extraction once then fails the round") {
    DatabaseSchema schema = toy_schema();
    auto scripted = std::make_shared<ScriptedBackend>();
    scripted->add_sequence(ModelRole::Generator,
                           {"I would rather describe the schema in prose.",
                            "```sql\nSELECT id FROM orders WHERE total > 10;\n```"});
    LlmGateway gateway;
    gateway.set_backend(ModelRole::Generator, scripted);
    CandidateBatch batch = generate(gateway, schema, {"orders"}, {}, 1);
    CHECK(batch.candidates.size() == 1);

    auto refuses = std::make_shared<CapturingBackend>("no sql here");
    LlmGateway stubborn;
    stubborn.set_backend(ModelRole::Generator, refuses);
    CHECK_THROWS_AS(generate(stubborn, schema, {"orders"}, {}, 1), Error);
    CHECK(refuses->calls == 2);  // one retry
}

TEST_CASE("generation prompt carries schema, hints, and anti-trivial instructions") {
    DatabaseSchema schema = toy_schema();
    std::map<std::string, ContentHints> hints;
    ContentHints h;
    h.table = "products";
    ColumnHints price;
    price.type_class = TypeClass::Numeric;
    price.min_value = "1";
    price.max_value = "500";
    h.columns["price"] = price;
    hints["products"] = h;

    auto capturing = std::make_shared<CapturingBackend>("```sql\nSELECT 1;\n```");
    LlmGateway gateway;
    gateway.set_backend(ModelRole::Generator, capturing);
    generate(gateway, schema, {"products", "order_lines"}, hints, 3);

    const std::string& prompt = capturing->last_request.prompt;
    CHECK(prompt.find("Table: products") != std::string::npos);
    CHECK(prompt.find("range: 1 .. 500") != std::string::npos);
    CHECK(prompt.find("order_lines.product_id -> products.id") != std::string::npos);
    CHECK(prompt.find("Avoid trivial query types") != std::string::npos);
}

TEST_CASE("seed_select filters by table intersection") {
    SqlPool pool(fresh_path("agents_seed_pool.db"));
    TextEncoder encoder = make_fallback_encoder();
    auto add = [&](const std::string& sql_text) {
        AnalyzedQuery q = analyze_query(sql_text, Origin::Gen, 0, encoder);
        REQUIRE(pool.insert(q.record, q.signature.embedding).inserted);
    };
    add("SELECT * FROM orders o JOIN customers c ON o.customer_id = c.id");
    add("SELECT o.id FROM orders o JOIN customers c ON o.customer_id = c.id WHERE o.total > 5");
    add("SELECT * FROM products");

    auto seeds = seed_select(pool, {"orders"}, 10);
    CHECK(seeds.size() == 2);
    for (const SeedQuery& s : seeds) CHECK(s.sql_text.find("orders") != std::string::npos);
    CHECK(seed_select(pool, {"regions"}, 10).empty());  // empty-seed signal
}

TEST_CASE("seed ranking prefers structural richness") {
    SqlPool pool(fresh_path("agents_seed_rank.db"));
    TextEncoder encoder = make_fallback_encoder();
    auto add = [&](const std::string& sql_text) {
        AnalyzedQuery q = analyze_query(sql_text, Origin::Gen, 0, encoder);
        REQUIRE(pool.insert(q.record, q.signature.embedding).inserted);
    };
    add("SELECT id FROM orders");  // 0 joins
    add("SELECT o.id FROM orders o JOIN order_lines ol ON ol.order_id = o.id JOIN products p "
        "ON ol.product_id = p.id JOIN customers c ON o.customer_id = c.id WHERE o.total > 9");
    auto seeds = seed_select(pool, {"orders"}, 2);
    REQUIRE(seeds.size() == 2);
    CHECK(seeds[0].id == 2);  // the 3-join query outranks the bare scan
}

TEST_CASE("seed_select matches a filter-and-sort oracle on a 500-record pool") {
    SqlPool pool(fresh_path("agents_seed_oracle.db"));
    fill_pool(pool, 500);
    std::set<std::string> targets{"orders", "products"};
    auto seeds = seed_select(pool, targets, 20);
    REQUIRE(seeds.size() == 20);

    // oracle: full scan, same ordering rule, computed independently
    struct Row {
        std::int64_t id;
        int richness;
        std::int64_t freq;
    };
    std::map<std::string, std::int64_t> freq;
    pool.for_each([&](const SqlQueryRecord& r) {
        std::string key;
        for (const std::string& t : r.referenced_tables) key += t + ";";
        ++freq[key];
    });
    std::vector<Row> rows;
    pool.for_each([&](const SqlQueryRecord& r) {
        bool hit = false;
        for (const std::string& t : r.referenced_tables)
            if (targets.count(t)) hit = true;
        if (!hit) return;
        std::string key;
        for (const std::string& t : r.referenced_tables) key += t + ";";
        rows.push_back({r.id,
                        r.features.join_count + r.features.predicate_count +
                            r.features.nesting_depth + r.features.aggregate_count,
                        freq[key]});
    });
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.richness != b.richness) return a.richness > b.richness;
        if (a.freq != b.freq) return a.freq < b.freq;
        return a.id < b.id;
    });
    for (std::size_t i = 0; i < seeds.size(); ++i) CHECK(seeds[i].id == rows[i].id);
}

TEST_CASE("expand produces parseable variants distinct from their seed") {
    std::vector<std::string> seeds = {
        "SELECT o.id FROM orders o WHERE o.total > 100"};
    std::string transcript =
        "```sql\n"
        "SELECT o.id FROM orders o WHERE o.total > 250 AND o.status = 'open';\n"
        "WITH big AS (SELECT id, total FROM orders WHERE total > 100) SELECT COUNT(*) FROM big;\n"
        "SELECT o.id, COUNT(*) FROM orders o GROUP BY o.id HAVING COUNT(*) > 1;\n"
        "```";
    auto capturing = std::make_shared<CapturingBackend>(transcript);
    LlmGateway gateway;
    gateway.set_backend(ModelRole::Expander, capturing);

    CandidateBatch batch = expand(gateway, seeds, 3);
    CHECK(batch.candidates.size() == 3);
    CHECK(capturing->last_request.temperature == 0.8);
    std::string seed_normalized = sql::normalized_text(seeds[0]);
    for (const std::string& v : batch.candidates) {
        CHECK_NOTHROW(sql::parse(v));
        CHECK(sql::normalized_text(v) != seed_normalized);
    }
    CHECK(capturing->last_request.prompt.find("structural rewriting") != std::string::npos);
    CHECK_THROWS_AS(expand(gateway, {}, 3), Error);
}

TEST_CASE("critical GEN phase gates on executability only") {
    SqlPool pool(fresh_path("agents_critical_gen.db"));
    ExecHarness harness(toy_db_path());
    std::vector<std::string> batch = {
        "SELECT id FROM orders WHERE total > 50",
        "SELECT name FROM customers WHERE age > 30",
        "SELECT * FROM ghost_table",
        "SELECT city, COUNT(*) FROM customers GROUP BY city",
    };
    CriticalResult result = critical_evaluate(batch, Origin::Gen, 0, {}, harness, pool,
                                              make_fallback_encoder());
    CHECK(result.report.agg.accepted == 3);
    CHECK(result.report.agg.rejected_nonexecutable == 1);
    CHECK(result.report.agg.executable_fraction == 0.75);
    CHECK(result.report.counts_consistent());
    CHECK(pool.size() == 3);
    // accepted records captured their acceptance-time neighbor similarity
    pool.for_each([](const SqlQueryRecord& r) {
        CHECK(r.max_neighbor_similarity < 1.0);
    });
}

TEST_CASE("critical EXP phase rejects exact duplicates at similarity 1.0") {
    SqlPool pool(fresh_path("agents_critical_dup.db"));
    ExecHarness harness(toy_db_path());
    std::string q = "SELECT id FROM orders WHERE total > 50";
    critical_evaluate({q}, Origin::Gen, 0, {}, harness, pool, make_fallback_encoder());
    REQUIRE(pool.size() == 1);

    CriticalResult result = critical_evaluate({q}, Origin::Exp, 1, {}, harness, pool,
                                              make_fallback_encoder());
    CHECK(result.report.agg.accepted == 0);
    CHECK(result.report.agg.rejected_duplicate + result.report.agg.rejected_similarity == 1);
    CHECK(result.report.per_query[0].max_neighbor_similarity == 1.0);
    CHECK(pool.size() == 1);
}

TEST_CASE("critical EXP acceptance equals a brute-force re-check") {
    SqlPool pool(fresh_path("agents_critical_oracle.db"));
    fill_pool(pool, 1000);
    ExecHarness harness(toy_db_path());
    CriticalOptions options;
    options.theta_sim = 0.9;

    // mixed batch: fresh structures plus near-copies of pooled queries
    std::vector<std::string> batch;
    for (std::size_t i = 0; i < 12; ++i) batch.push_back(testing::synthetic_query(3000 + i * 11));
    for (std::size_t i = 0; i < 6; ++i) batch.push_back(testing::synthetic_query(i * 83));

    TextEncoder encoder = make_fallback_encoder();
    // signatures of the pool before evaluation, in id order
    std::vector<QuerySignature> snapshot;
    pool.for_each([&](const SqlQueryRecord& r) { snapshot.push_back(pool.signature_of(r.id)); });

    CriticalResult result =
        critical_evaluate(batch, Origin::Exp, 1, options, harness, pool, encoder);
    CHECK(result.report.counts_consistent());

    // oracle replay: maintain the visible pool (snapshot + accepted so far)
    HybridWeights w;
    for (const QueryVerdict& verdict : result.report.per_query) {
        if (verdict.outcome == VerdictOutcome::RejectedParse ||
            verdict.outcome == VerdictOutcome::RejectedNonExecutable)
            continue;
        AnalyzedQuery analyzed = analyze_query(verdict.sql_text, Origin::Exp, 1, encoder);
        double brute_max = 0.0;
        for (const QuerySignature& sig : snapshot)
            brute_max = std::max(brute_max, hybrid(analyzed.signature, sig, w).combined);
        CHECK(verdict.max_neighbor_similarity == Catch::Approx(brute_max).margin(1e-9));
        bool is_duplicate_of_visible = false;
        for (const QuerySignature& sig : snapshot)
            if (sql::render(sig.ast) == analyzed.record.normalized_text)
                is_duplicate_of_visible = true;
        bool should_accept = !is_duplicate_of_visible && brute_max < options.theta_sim;
        CHECK((verdict.outcome == VerdictOutcome::Accepted) == should_accept);
        if (verdict.outcome == VerdictOutcome::Accepted)
            snapshot.push_back(pool.signature_of(verdict.id));
    }
}

TEST_CASE("manage_decide rule policy") {
    SchedulerPolicy policy;  // W=3, C=5, theta_red=0.85, theta_exec=0.5
    RoundAggregates report;

    SECTION("warm-up holds GEN") {
        SchedulerState state;
        state.round = 0;
        PhaseDecision d = manage_decide(state, report, policy);
        CHECK(d.next_phase == Origin::Gen);
        CHECK(d.reason == PhaseReason::Warmup);
    }
    SECTION("GEN switches to EXP after C consecutive cycles") {
        SchedulerState state;
        state.round = 5;
        state.phase = Origin::Gen;
        state.consecutive_gen_rounds = 5;
        PhaseDecision d = manage_decide(state, report, policy);
        CHECK(d.next_phase == Origin::Exp);
        CHECK(d.reason == PhaseReason::ExploitOk);

        state.consecutive_gen_rounds = 4;
        CHECK(manage_decide(state, report, policy).next_phase == Origin::Gen);
    }
    SECTION("EXP returns to GEN on high redundancy") {
        SchedulerState state;
        state.round = 8;
        state.phase = Origin::Exp;
        report.mean_max_neighbor_similarity = 0.95;
        PhaseDecision d = manage_decide(state, report, policy);
        CHECK(d.next_phase == Origin::Gen);
        CHECK(d.reason == PhaseReason::RedundancyHigh);
    }
    SECTION("EXP returns to GEN on low executability") {
        SchedulerState state;
        state.round = 8;
        state.phase = Origin::Exp;
        report.mean_max_neighbor_similarity = 0.5;
        report.executable_fraction = 0.3;
        PhaseDecision d = manage_decide(state, report, policy);
        CHECK(d.next_phase == Origin::Gen);
        CHECK(d.reason == PhaseReason::ExecutabilityLow);
    }
    SECTION("healthy EXP keeps exploiting") {
        SchedulerState state;
        state.round = 8;
        state.phase = Origin::Exp;
        report.mean_max_neighbor_similarity = 0.6;
        report.executable_fraction = 0.9;
        PhaseDecision d = manage_decide(state, report, policy);
        CHECK(d.next_phase == Origin::Exp);
        CHECK(d.reason == PhaseReason::ExploitOk);
    }
}

TEST_CASE("llm-advised scheduling is guard-railed") {
    SchedulerPolicy policy;
    policy.llm_advised = true;

    SchedulerState state;
    state.round = 8;
    state.phase = Origin::Exp;
    RoundAggregates report;
    report.mean_max_neighbor_similarity = 0.95;  // redundancy trigger fires
    report.executable_fraction = 0.2;            // executability trigger fires

    // model insists on EXP; both triggers fire → rule override to GEN
    auto insists = std::make_shared<CapturingBackend>("EXP");
    LlmGateway gateway;
    gateway.set_backend(ModelRole::Reasoner, insists);
    PhaseDecision d = manage_decide(state, report, policy, &gateway);
    CHECK(d.next_phase == Origin::Gen);
    CHECK(d.reason == PhaseReason::RedundancyHigh);

    // no trigger: advice may diverge from the rule
    report.mean_max_neighbor_similarity = 0.4;
    report.executable_fraction = 0.9;
    auto advises_gen = std::make_shared<CapturingBackend>("GEN");
    LlmGateway gateway2;
    gateway2.set_backend(ModelRole::Reasoner, advises_gen);
    PhaseDecision d2 = manage_decide(state, report, policy, &gateway2);
    CHECK(d2.next_phase == Origin::Gen);
    CHECK_FALSE(d2.advisory_text.empty());

    // gateway failure falls back to the rule policy
    LlmGateway broken;
    PhaseDecision d3 = manage_decide(state, report, policy, &broken);
    CHECK(d3.next_phase == Origin::Exp);
}
