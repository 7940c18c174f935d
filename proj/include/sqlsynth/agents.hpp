// Copyright 2026 The sqlsynth Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sqlsynth/error.hpp"
#include "sqlsynth/exec.hpp"
#include "sqlsynth/gateway.hpp"
#include "sqlsynth/pool.hpp"
#include "sqlsynth/prompts.hpp"
#include "sqlsynth/schema.hpp"
#include "sqlsynth/similarity.hpp"

namespace sqlsynth {

// The six agents. Table/seed selection and generation/expansion are thin
// decision layers over the gateway and pool; the critical agent is the only
// path into the pool; the management agent drives the GEN/EXP state machine.

// ── evaluation report ───────────────────────────────────────────

enum class VerdictOutcome {
    Accepted,
    RejectedParse,
    RejectedNonExecutable,
    RejectedDuplicate,
    RejectedSimilarity,
};

inline const char* verdict_outcome_name(VerdictOutcome o) {
    switch (o) {
        case VerdictOutcome::Accepted: return "accepted";
        case VerdictOutcome::RejectedParse: return "rejected-parse";
        case VerdictOutcome::RejectedNonExecutable: return "rejected-nonexecutable";
        case VerdictOutcome::RejectedDuplicate: return "rejected-duplicate";
        case VerdictOutcome::RejectedSimilarity: return "rejected-similarity";
    }
    return "?";
}

struct QueryVerdict {
    std::string sql_text;
    VerdictOutcome outcome = VerdictOutcome::RejectedParse;
    ExecErrorClass error_class = ExecErrorClass::None;
    bool empty_result = false;
    double max_neighbor_similarity = 0.0;
    std::int64_t id = 0;  // assigned when accepted
};

/// Aggregate slice of a round's evaluation; what scheduling decisions and
/// checkpoints need.
struct RoundAggregates {
    int round = 0;
    Origin phase = Origin::Gen;
    int batch_size = 0;
    double executable_fraction = 0.0;
    int accepted = 0;
    int rejected_parse = 0;
    int rejected_nonexecutable = 0;
    int rejected_duplicate = 0;
    int rejected_similarity = 0;
    double mean_max_neighbor_similarity = 0.0;
};

struct EvaluationReport {
    RoundAggregates agg;
    std::vector<QueryVerdict> per_query;

    /// accepted + every rejection class must cover the batch
    bool counts_consistent() const {
        return agg.accepted + agg.rejected_parse + agg.rejected_nonexecutable +
                   agg.rejected_duplicate + agg.rejected_similarity ==
               agg.batch_size;
    }
};

// ── scheduler state ─────────────────────────────────────────────

enum class PhaseReason { Warmup, RedundancyHigh, ExecutabilityLow, ExploitOk, Budget };

inline const char* phase_reason_name(PhaseReason r) {
    switch (r) {
        case PhaseReason::Warmup: return "warmup";
        case PhaseReason::RedundancyHigh: return "redundancy-high";
        case PhaseReason::ExecutabilityLow: return "executability-low";
        case PhaseReason::ExploitOk: return "exploit-ok";
        case PhaseReason::Budget: return "budget";
    }
    return "?";
}

struct PhaseDecision {
    Origin next_phase = Origin::Gen;
    PhaseReason reason = PhaseReason::Warmup;
    std::string advisory_text;  // model rationale when llm-advised
};

struct SchedulerState {
    Origin phase = Origin::Gen;
    int round = 0;  // completed rounds
    int consecutive_gen_rounds = 0;
    std::vector<RoundAggregates> report_history;
    std::vector<double> expansion_ratio_series;     // one entry per round
    std::vector<double> rolling_similarity_series;  // window mean, per round
    std::vector<double> acceptance_rate_series;
    std::vector<Origin> phase_timeline;

    bool series_consistent() const {
        auto n = static_cast<std::size_t>(round);
        return report_history.size() == n && expansion_ratio_series.size() == n &&
               rolling_similarity_series.size() == n && acceptance_rate_series.size() == n &&
               phase_timeline.size() == n;
    }
};

// ── table selection agent ───────────────────────────────────────

/// Deterministic coverage-gap ranking: complexity relative to how much the
/// pool already covers the table. Used as the model fallback and for seed
/// targeting.
inline std::vector<std::string> rank_tables_by_coverage_gap(
    const DatabaseSchema& schema, const std::map<std::string, std::int64_t>& pool_stats) {
    std::vector<TableProfile> profiles = profile_all_tables(schema, pool_stats);
    std::sort(profiles.begin(), profiles.end(), [](const TableProfile& a, const TableProfile& b) {
        double ra = static_cast<double>(a.complexity) / static_cast<double>(1 + a.query_count);
        double rb = static_cast<double>(b.complexity) / static_cast<double>(1 + b.query_count);
        if (ra != rb) return ra > rb;
        return a.table < b.table;
    });
    std::vector<std::string> out;
    out.reserve(profiles.size());
    for (const TableProfile& p : profiles) out.push_back(p.table);
    return out;
}

namespace detail {

/// Table names out of a model reply: one per line or comma-separated, list
/// markers and quoting stripped, lowercased.
inline std::vector<std::string> parse_table_names(const std::string& response) {
    std::vector<std::string> out;
    std::string current;
    auto flush = [&] {
        std::size_t b = 0, e = current.size();
        while (b < e && !std::isalnum(static_cast<unsigned char>(current[b])) &&
               current[b] != '_')
            ++b;
        while (e > b && !std::isalnum(static_cast<unsigned char>(current[e - 1])) &&
               current[e - 1] != '_')
            --e;
        std::string name;
        for (std::size_t i = b; i < e; ++i)
            name.push_back(
                static_cast<char>(std::tolower(static_cast<unsigned char>(current[i]))));
        if (!name.empty()) out.push_back(std::move(name));
        current.clear();
    };
    for (char c : response) {
        if (c == '\n' || c == ',') flush();
        else current.push_back(c);
    }
    flush();
    return out;
}

}  // namespace detail

/// Pick the tables to target next. The model chooses from per-table
/// ⟨schema, coverage, complexity⟩ summaries; invalid names are dropped and a
/// shortfall is filled deterministically by coverage gap.
inline std::set<std::string> table_select(LlmGateway& gateway, const DatabaseSchema& schema,
                                          const std::map<std::string, std::int64_t>& pool_stats,
                                          int n_tables) {
    if (schema.tables.empty())
        throw Error(ErrorCode::SelectionError, "catalog has no tables");
    std::vector<TableProfile> profiles = profile_all_tables(schema, pool_stats);
    std::string response = gateway.complete(
        ModelRole::Reasoner, prompts::table_selection_prompt(schema, profiles, n_tables));

    std::set<std::string> chosen;
    for (const std::string& name : detail::parse_table_names(response)) {
        if (static_cast<int>(chosen.size()) >= n_tables) break;
        if (schema.find_table(name)) chosen.insert(name);
    }
    for (const std::string& name : rank_tables_by_coverage_gap(schema, pool_stats)) {
        if (static_cast<int>(chosen.size()) >= n_tables) break;
        chosen.insert(name);
    }
    if (chosen.empty()) throw Error(ErrorCode::SelectionError, "no valid table selection");
    return chosen;
}

// ── generation / expansion agents ───────────────────────────────

struct CandidateBatch {
    std::vector<std::string> candidates;  // parseable SQL
    int dropped_unparseable = 0;
};

namespace detail {

inline CandidateBatch extract_and_filter(const std::string& response) {
    CandidateBatch out;
    for (std::string& sql_text : extract_sql(response)) {
        try {
            sql::parse(sql_text);
            out.candidates.push_back(std::move(sql_text));
        } catch (const ParseError&) {
            ++out.dropped_unparseable;
        }
    }
    return out;
}

inline CandidateBatch complete_and_extract(LlmGateway& gateway, ModelRole role,
                                           const std::string& prompt) {
    CandidateBatch batch = extract_and_filter(gateway.complete(role, prompt));
    if (!batch.candidates.empty()) return batch;
    CandidateBatch retry = extract_and_filter(gateway.complete(role, prompt));
    if (retry.candidates.empty())
        throw Error(ErrorCode::GatewayError, "empty extraction after retry");
    return retry;
}

}  // namespace detail

/// Exploration: open-ended synthesis over the joint schema of the selected
/// tables, content hints inline. Unparseable model output is dropped and
/// counted.
inline CandidateBatch generate(LlmGateway& gateway, const DatabaseSchema& schema,
                               const std::set<std::string>& tables,
                               const std::map<std::string, ContentHints>& hints, int batch) {
    if (tables.empty()) throw Error(ErrorCode::InvalidInput, "no tables selected");
    std::string prompt =
        prompts::generation_prompt(render_schema_block(schema, tables, hints), batch);
    return detail::complete_and_extract(gateway, ModelRole::Generator, prompt);
}

/// Exploitation: variants of pooled seeds.
inline CandidateBatch expand(LlmGateway& gateway, const std::vector<std::string>& seeds,
                             int batch) {
    if (seeds.empty()) throw Error(ErrorCode::InvalidInput, "no seed queries");
    return detail::complete_and_extract(gateway, ModelRole::Expander,
                                        prompts::expansion_prompt(seeds, batch));
}

// ── seed selection agent ────────────────────────────────────────

struct SeedQuery {
    std::int64_t id = 0;
    std::string sql_text;
};

/// Seeds are pooled queries touching the target tables, ranked by structural
/// richness (descending) then by how common their exact table set already is
/// (ascending), ties toward lower id. An empty result is the empty-seed
/// signal; the scheduler must fall back to a GEN round.
inline std::vector<SeedQuery> seed_select(const SqlPool& pool,
                                          const std::set<std::string>& tables, int n_seeds) {
    struct Ranked {
        std::int64_t id;
        int richness;
        std::int64_t set_frequency;
        const SqlQueryRecord* record;
    };
    std::map<std::string, std::int64_t> set_frequency;
    std::vector<Ranked> eligible;
    pool.for_each([&](const SqlQueryRecord& r) {
        std::string key;
        for (const std::string& t : r.referenced_tables) key += t + ";";
        ++set_frequency[key];
    });
    pool.for_each([&](const SqlQueryRecord& r) {
        bool intersects = false;
        for (const std::string& t : r.referenced_tables)
            if (tables.count(t)) {
                intersects = true;
                break;
            }
        if (!intersects) return;
        std::string key;
        for (const std::string& t : r.referenced_tables) key += t + ";";
        int richness = r.features.join_count + r.features.predicate_count +
                       r.features.nesting_depth + r.features.aggregate_count;
        eligible.push_back({r.id, richness, set_frequency[key], &r});
    });
    std::sort(eligible.begin(), eligible.end(), [](const Ranked& a, const Ranked& b) {
        if (a.richness != b.richness) return a.richness > b.richness;
        if (a.set_frequency != b.set_frequency) return a.set_frequency < b.set_frequency;
        return a.id < b.id;
    });
    std::vector<SeedQuery> out;
    for (const Ranked& r : eligible) {
        if (static_cast<int>(out.size()) >= n_seeds) break;
        out.push_back({r.id, r.record->sql_text});
    }
    return out;
}

// ── critical agent ──────────────────────────────────────────────

struct CriticalOptions {
    std::size_t k = 10;          // hybrid rerank depth; candidate stage is k*20
    double theta_sim = 0.9;      // EXP-phase redundancy rejection threshold
    HybridWeights weights;
};

struct CriticalResult {
    EvaluationReport report;
    std::vector<std::int64_t> accepted_ids;
};

/// The only path into the pool. Every candidate is executed read-only
/// (parallel), then gated sequentially so that within-batch siblings are
/// visible to the redundancy check: GEN accepts anything executable and
/// non-duplicate, EXP additionally requires the max hybrid similarity to the
/// pooled top-k neighbors to stay below theta_sim. Accepted queries are
/// inserted immediately; neighbor similarity is recorded on the stored
/// record for post-hoc verification.
inline CriticalResult critical_evaluate(const std::vector<std::string>& batch, Origin phase,
                                        int round, const CriticalOptions& options,
                                        const ExecHarness& harness, SqlPool& pool,
                                        const TextEncoder& encoder) {
    if (batch.empty()) throw Error(ErrorCode::InvalidInput, "empty candidate batch");
    CriticalResult result;
    result.report.agg.round = round;
    result.report.agg.phase = phase;
    result.report.agg.batch_size = static_cast<int>(batch.size());

    std::vector<ExecVerdict> exec_verdicts = harness.check_batch(batch);

    int executable_count = 0;
    double similarity_sum = 0.0;
    int similarity_count = 0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        QueryVerdict verdict;
        verdict.sql_text = batch[i];
        verdict.error_class = exec_verdicts[i].error_class;
        verdict.empty_result = exec_verdicts[i].empty_result;

        AnalyzedQuery analyzed;
        bool parsed = true;
        try {
            analyzed = analyze_query(batch[i], phase, round, encoder);
        } catch (const ParseError&) {
            parsed = false;
        }
        if (!parsed) {
            verdict.outcome = VerdictOutcome::RejectedParse;
            ++result.report.agg.rejected_parse;
            result.report.per_query.push_back(std::move(verdict));
            continue;
        }
        if (!exec_verdicts[i].executable) {
            verdict.outcome = VerdictOutcome::RejectedNonExecutable;
            ++result.report.agg.rejected_nonexecutable;
            result.report.per_query.push_back(std::move(verdict));
            continue;
        }
        ++executable_count;

        double sim = pool.max_neighbor_similarity(analyzed.signature, options.k,
                                                  options.weights);
        verdict.max_neighbor_similarity = sim;
        similarity_sum += sim;
        ++similarity_count;

        if (pool.find_normalized(analyzed.record.normalized_text)) {
            verdict.outcome = VerdictOutcome::RejectedDuplicate;
            ++result.report.agg.rejected_duplicate;
            result.report.per_query.push_back(std::move(verdict));
            continue;
        }
        if (phase == Origin::Exp && sim >= options.theta_sim) {
            verdict.outcome = VerdictOutcome::RejectedSimilarity;
            ++result.report.agg.rejected_similarity;
            result.report.per_query.push_back(std::move(verdict));
            continue;
        }

        analyzed.record.executable = true;
        analyzed.record.empty_result = exec_verdicts[i].empty_result;
        analyzed.record.max_neighbor_similarity = sim;
        InsertResult inserted = pool.insert(analyzed.record, analyzed.signature.embedding);
        if (!inserted.inserted) {
            verdict.outcome = VerdictOutcome::RejectedDuplicate;
            ++result.report.agg.rejected_duplicate;
            result.report.per_query.push_back(std::move(verdict));
            continue;
        }
        verdict.outcome = VerdictOutcome::Accepted;
        verdict.id = inserted.id;
        ++result.report.agg.accepted;
        result.accepted_ids.push_back(inserted.id);
        result.report.per_query.push_back(std::move(verdict));
    }

    result.report.agg.executable_fraction =
        static_cast<double>(executable_count) / static_cast<double>(batch.size());
    result.report.agg.mean_max_neighbor_similarity =
        similarity_count ? similarity_sum / static_cast<double>(similarity_count) : 0.0;
    return result;
}

// ── management agent ────────────────────────────────────────────

struct SchedulerPolicy {
    int warmup_rounds = 3;    // W: stay GEN this many initial rounds
    int gen_cycles = 5;       // C: consecutive GEN rounds before exploiting
    double theta_red = 0.85;  // EXP → GEN when batch similarity exceeds this
    double theta_exec = 0.5;  // EXP → GEN when executability falls below this
    bool llm_advised = false;
};

namespace detail {

inline PhaseDecision rule_decide(const SchedulerState& state, const RoundAggregates& report,
                                 const SchedulerPolicy& policy) {
    if (state.round < policy.warmup_rounds) return {Origin::Gen, PhaseReason::Warmup, {}};
    if (state.phase == Origin::Gen) {
        if (state.consecutive_gen_rounds >= policy.gen_cycles)
            return {Origin::Exp, PhaseReason::ExploitOk, {}};
        return {Origin::Gen, PhaseReason::Warmup, {}};
    }
    if (report.mean_max_neighbor_similarity > policy.theta_red)
        return {Origin::Gen, PhaseReason::RedundancyHigh, {}};
    if (report.executable_fraction < policy.theta_exec)
        return {Origin::Gen, PhaseReason::ExecutabilityLow, {}};
    return {Origin::Exp, PhaseReason::ExploitOk, {}};
}

}  // namespace detail

/// Choose the next phase from the latest evaluation. The rule policy is a
/// pure function of (state, report, thresholds). The llm-advised policy asks
/// the reasoner but hard guards keep the state machine safe: warmup is
/// binding, and the model may never hold EXP while a redundancy or
/// executability trigger fires.
inline PhaseDecision manage_decide(const SchedulerState& state, const RoundAggregates& report,
                                   const SchedulerPolicy& policy,
                                   LlmGateway* gateway = nullptr) {
    PhaseDecision rule = detail::rule_decide(state, report, policy);
    if (!policy.llm_advised || gateway == nullptr) return rule;

    bool trigger_fired = state.phase == Origin::Exp &&
                         (report.mean_max_neighbor_similarity > policy.theta_red ||
                          report.executable_fraction < policy.theta_exec);
    bool in_warmup = state.round < policy.warmup_rounds;

    std::string advice_text;
    try {
        ExpansionRatio ratio{state.expansion_ratio_series.empty()
                                 ? 0.0
                                 : state.expansion_ratio_series.back(),
                             state.expansion_ratio_series.empty()};
        advice_text = gateway->complete(
            ModelRole::Reasoner,
            prompts::management_prompt(state.round, origin_name(state.phase),
                                       report.executable_fraction,
                                       report.mean_max_neighbor_similarity, ratio.ratio, ""));
    } catch (const Error&) {
        return rule;  // advisory only; rule policy always works
    }

    std::optional<Origin> advice;
    if (advice_text.find("EXP") != std::string::npos) advice = Origin::Exp;
    else if (advice_text.find("GEN") != std::string::npos) advice = Origin::Gen;
    if (!advice) return rule;

    if (in_warmup || (trigger_fired && *advice == Origin::Exp)) {
        rule.advisory_text = advice_text;
        return rule;  // guard override
    }
    if (*advice == rule.next_phase) {
        rule.advisory_text = advice_text;
        return rule;
    }
    PhaseDecision out;
    out.next_phase = *advice;
    out.reason = *advice == Origin::Exp ? PhaseReason::ExploitOk : PhaseReason::Warmup;
    out.advisory_text = advice_text;
    return out;
}

}  // namespace sqlsynth
