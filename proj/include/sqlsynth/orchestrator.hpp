// Copyright 2026 The sqlsynth Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqlsynth/agents.hpp"
#include "sqlsynth/error.hpp"
#include "sqlsynth/exec.hpp"
#include "sqlsynth/gateway.hpp"
#include "sqlsynth/pool.hpp"
#include "sqlsynth/schema.hpp"

namespace sqlsynth {

// The synthesis loop: decide phase, invoke the team, evaluate, record, and
// stop on target, saturation, or budget. Each round's pool mutations ride one
// transaction, so a crash at any point resumes cleanly from the last
// completed round.

struct RunConfig {
    // stop rule
    std::int64_t target_query_count = 500;
    int max_rounds = 1000;
    double dominance_ratio = 0.8;  // expansion-ratio level for saturation
    int window = 5;                // V: rolling-similarity window

    // per-round batches
    int gen_batch = 20;
    int exp_batch = 50;
    int n_tables = 3;
    int n_seeds = 5;

    HybridWeights weights;
    CriticalOptions critical;
    SchedulerPolicy policy;
    ExecOptions exec;

    int embedding_dim = kDefaultEmbeddingDim;
    std::uint64_t seed = 42;

    void validate() const {
        weights.validate();
        auto in_unit = [](double x) { return x > 0.0 && x < 1.0; };
        if (!in_unit(critical.theta_sim) || !in_unit(policy.theta_red) ||
            !in_unit(policy.theta_exec) || !(dominance_ratio > 0.0 && dominance_ratio <= 1.0))
            throw Error(ErrorCode::ConfigError, "thresholds must lie in (0,1)");
        if (target_query_count < 0 || max_rounds < 1 || gen_batch < 1 || exp_batch < 1 ||
            n_tables < 1 || n_seeds < 1 || window < 1 || critical.k < 1 ||
            policy.warmup_rounds < 0 || policy.gen_cycles < 1)
            throw Error(ErrorCode::ConfigError, "counts must be positive");
        if (embedding_dim < 1) throw Error(ErrorCode::ConfigError, "embedding_dim must be >= 1");
    }

    static RunConfig from_json(const nlohmann::json& j) {
        RunConfig c;
        if (j.contains("stop")) {
            const auto& s = j["stop"];
            c.target_query_count = s.value("target_query_count", c.target_query_count);
            c.max_rounds = s.value("max_rounds", c.max_rounds);
            c.dominance_ratio = s.value("dominance_ratio", c.dominance_ratio);
            c.window = s.value("window", c.window);
        }
        if (j.contains("batches")) {
            const auto& b = j["batches"];
            c.gen_batch = b.value("gen", c.gen_batch);
            c.exp_batch = b.value("exp", c.exp_batch);
            c.n_tables = b.value("tables", c.n_tables);
            c.n_seeds = b.value("seeds", c.n_seeds);
        }
        if (j.contains("weights")) {
            const auto& w = j["weights"];
            c.weights.alpha = w.value("alpha", c.weights.alpha);
            c.weights.beta = w.value("beta", c.weights.beta);
            c.weights.gamma = w.value("gamma", c.weights.gamma);
        }
        if (j.contains("retrieval")) {
            const auto& r = j["retrieval"];
            c.critical.k = r.value("k", c.critical.k);
            c.critical.theta_sim = r.value("theta_sim", c.critical.theta_sim);
        }
        if (j.contains("scheduler")) {
            const auto& s = j["scheduler"];
            c.policy.warmup_rounds = s.value("warmup_rounds", c.policy.warmup_rounds);
            c.policy.gen_cycles = s.value("gen_cycles", c.policy.gen_cycles);
            c.policy.theta_red = s.value("theta_red", c.policy.theta_red);
            c.policy.theta_exec = s.value("theta_exec", c.policy.theta_exec);
            c.policy.llm_advised = s.value("policy", "rule") == std::string("llm-advised");
        }
        if (j.contains("exec")) {
            const auto& e = j["exec"];
            c.exec.timeout = std::chrono::milliseconds(
                e.value("timeout_ms", static_cast<int>(c.exec.timeout.count())));
            c.exec.row_cap = e.value("row_cap", c.exec.row_cap);
            c.exec.parallelism = e.value("parallelism", c.exec.parallelism);
        }
        c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
        c.seed = j.value("seed", c.seed);
        c.weights.validate();
        c.critical.weights = c.weights;
        c.validate();
        return c;
    }
};

enum class StopReason { None, Target, Saturation, Budget };

inline const char* stop_reason_name(StopReason r) {
    switch (r) {
        case StopReason::None: return "none";
        case StopReason::Target: return "target";
        case StopReason::Saturation: return "saturation";
        case StopReason::Budget: return "budget";
    }
    return "?";
}

struct StopDecision {
    bool stop = false;
    StopReason reason = StopReason::None;
};

/// Stop on target count, on the saturation rule (expansion dominates AND the
/// rolling similarity is non-decreasing with a net rise over the last V
/// rounds), or on the round budget.
inline StopDecision should_stop(const SchedulerState& state, std::int64_t pool_size,
                                const RunConfig& config) {
    if (pool_size >= config.target_query_count) return {true, StopReason::Target};
    if (state.round >= config.max_rounds) return {true, StopReason::Budget};
    const auto window = static_cast<std::size_t>(config.window);
    if (state.round >= config.window &&
        !state.expansion_ratio_series.empty() &&
        state.expansion_ratio_series.back() >= config.dominance_ratio) {
        const auto& series = state.rolling_similarity_series;
        bool non_decreasing = true;
        for (std::size_t i = series.size() - window + 1; i < series.size(); ++i)
            if (series[i] < series[i - 1]) non_decreasing = false;
        bool net_rise = series.back() > series[series.size() - window];
        if (non_decreasing && net_rise) return {true, StopReason::Saturation};
    }
    return {false, StopReason::None};
}

struct RoundLog {
    int round = 0;
    Origin phase = Origin::Gen;
    PhaseReason reason = PhaseReason::Warmup;
    bool forced_gen = false;  // EXP chosen but no seeds intersected the targets
    std::vector<std::string> tables;
    RoundAggregates agg;
};

struct RunReport {
    std::int64_t pool_size = 0;
    int rounds = 0;
    StopReason stop_reason = StopReason::None;
    std::vector<Origin> phase_timeline;
    std::vector<double> expansion_ratio;
    std::vector<double> rolling_similarity;
    std::vector<double> acceptance_rate;
    int total_accepted = 0;
    int total_rejected_similarity = 0;
    int total_rejected_duplicate = 0;
    int total_rejected_nonexecutable = 0;
    int phase_transitions = 0;

    nlohmann::json to_json() const {
        nlohmann::json timeline = nlohmann::json::array();
        for (Origin o : phase_timeline) timeline.push_back(origin_name(o));
        return nlohmann::json{
            {"pool_size", pool_size},
            {"rounds", rounds},
            {"stop_reason", stop_reason_name(stop_reason)},
            {"phase_timeline", timeline},
            {"expansion_ratio", expansion_ratio},
            {"rolling_similarity", rolling_similarity},
            {"acceptance_rate", acceptance_rate},
            {"total_accepted", total_accepted},
            {"total_rejected_similarity", total_rejected_similarity},
            {"total_rejected_duplicate", total_rejected_duplicate},
            {"total_rejected_nonexecutable", total_rejected_nonexecutable},
            {"phase_transitions", phase_transitions},
        };
    }

    /// Plot-ready time series, one row per round.
    std::string timeseries_csv() const {
        std::string out = "round,phase,expansion_ratio,rolling_similarity,acceptance_rate\n";
        for (std::size_t i = 0; i < phase_timeline.size(); ++i) {
            out += std::to_string(i) + "," + origin_name(phase_timeline[i]) + "," +
                   std::to_string(expansion_ratio[i]) + "," +
                   std::to_string(rolling_similarity[i]) + "," +
                   std::to_string(acceptance_rate[i]) + "\n";
        }
        return out;
    }
};

struct RunHooks {
    /// Called after evaluation, inside the round transaction. Throwing here
    /// simulates a crash mid-round.
    std::function<void(int round)> mid_round;
    /// Called after the round committed and the checkpoint was written.
    std::function<void(int round)> after_round;
};

inline constexpr int kCheckpointVersion = 1;

class Orchestrator {
public:
    Orchestrator(RunConfig config, DatabaseSchema schema, SqlPool& pool, ExecHarness& harness,
                 LlmGateway& gateway, TextEncoder encoder,
                 std::map<std::string, ContentHints> hints = {},
                 std::string checkpoint_path = {}, std::string audit_path = {})
        : config_(std::move(config)),
          schema_(std::move(schema)),
          pool_(pool),
          harness_(harness),
          gateway_(gateway),
          encoder_(std::move(encoder)),
          hints_(std::move(hints)),
          checkpoint_path_(std::move(checkpoint_path)),
          audit_path_(std::move(audit_path)) {
        config_.validate();
        schema_.validate();
    }

    void set_hooks(RunHooks hooks) { hooks_ = std::move(hooks); }
    const SchedulerState& state() const { return state_; }

    /// Run from the current state until a stop rule fires.
    RunReport run() {
        while (true) {
            StopDecision stop = should_stop(state_, static_cast<std::int64_t>(pool_.size()),
                                            config_);
            if (stop.stop) return build_report(stop.reason);
            run_one_round();
        }
    }

    /// Restore state from a checkpoint, then continue.
    RunReport resume(const std::string& checkpoint_path) {
        std::ifstream in(checkpoint_path);
        if (!in) throw Error(ErrorCode::CheckpointError,
                             "cannot read checkpoint: " + checkpoint_path);
        nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded())
            throw Error(ErrorCode::CheckpointError, "corrupt checkpoint (not valid JSON)");
        if (j.value("version", 0) != kCheckpointVersion)
            throw Error(ErrorCode::CheckpointError, "unsupported checkpoint version");
        if (j.value("pool_hash", std::string{}) != std::to_string(pool_.content_hash()))
            throw Error(ErrorCodes_pool_mismatch());
        restore_state(j);
        gateway_.restore_sequence_counters(
            j.value("gateway_counters", std::map<std::string, std::uint64_t>{}));
        return run();
    }

private:
    RunConfig config_;
    DatabaseSchema schema_;
    SqlPool& pool_;
    ExecHarness& harness_;
    LlmGateway& gateway_;
    TextEncoder encoder_;
    std::map<std::string, ContentHints> hints_;
    std::string checkpoint_path_;
    std::string audit_path_;
    SchedulerState state_;
    RunHooks hooks_;

    static Error ErrorCodes_pool_mismatch() {
        return Error(ErrorCode::CheckpointError,
                     "pool content hash does not match the checkpoint; refusing to resume");
    }

    void run_one_round() {
        RoundAggregates last = state_.report_history.empty() ? RoundAggregates{}
                                                             : state_.report_history.back();
        PhaseDecision decision =
            manage_decide(state_, last, config_.policy,
                          config_.policy.llm_advised ? &gateway_ : nullptr);

        RoundLog log;
        log.round = state_.round;
        log.phase = decision.next_phase;
        log.reason = decision.reason;

        pool_.begin_round();
        EvaluationReport report;
        try {
            report = execute_phase(log);
            if (hooks_.mid_round) hooks_.mid_round(state_.round);
            pool_.commit_round();
        } catch (...) {
            pool_.rollback_round();
            throw;
        }
        log.agg = report.agg;

        advance_state(log);
        write_audit(log);
        write_checkpoint();
        if (hooks_.after_round) hooks_.after_round(state_.round - 1);
    }

    EvaluationReport execute_phase(RoundLog& log) {
        auto stats = pool_.stats_per_table(schema_);
        if (log.phase == Origin::Exp) {
            std::set<std::string> targets;
            for (const std::string& t : rank_tables_by_coverage_gap(schema_, stats)) {
                if (static_cast<int>(targets.size()) >= config_.n_tables) break;
                targets.insert(t);
            }
            std::vector<SeedQuery> seeds = seed_select(pool_, targets, config_.n_seeds);
            if (!seeds.empty()) {
                log.tables.assign(targets.begin(), targets.end());
                std::vector<std::string> seed_texts;
                seed_texts.reserve(seeds.size());
                for (const SeedQuery& s : seeds) seed_texts.push_back(s.sql_text);
                CandidateBatch batch = expand(gateway_, seed_texts, config_.exp_batch);
                return evaluate(batch, Origin::Exp);
            }
            // no pooled query touches the targets: fall back to exploration
            log.phase = Origin::Gen;
            log.forced_gen = true;
        }
        std::set<std::string> tables =
            table_select(gateway_, schema_, stats, config_.n_tables);
        log.tables.assign(tables.begin(), tables.end());
        CandidateBatch batch = generate(gateway_, schema_, tables, hints_, config_.gen_batch);
        return evaluate(batch, Origin::Gen);
    }

    EvaluationReport evaluate(const CandidateBatch& batch, Origin phase) {
        if (batch.candidates.empty()) {
            EvaluationReport empty;
            empty.agg.round = state_.round;
            empty.agg.phase = phase;
            return empty;
        }
        CriticalResult result = critical_evaluate(batch.candidates, phase, state_.round,
                                                  config_.critical, harness_, pool_, encoder_);
        return std::move(result.report);
    }

    void advance_state(const RoundLog& log) {
        state_.phase = log.phase;
        state_.round += 1;
        if (log.phase == Origin::Gen) state_.consecutive_gen_rounds += 1;
        else state_.consecutive_gen_rounds = 0;
        state_.report_history.push_back(log.agg);
        state_.phase_timeline.push_back(log.phase);
        state_.expansion_ratio_series.push_back(pool_.expansion_ratio().ratio);
        state_.acceptance_rate_series.push_back(
            log.agg.batch_size > 0 ? static_cast<double>(log.agg.accepted) /
                                         static_cast<double>(log.agg.batch_size)
                                   : 0.0);
        // rolling mean of the last `window` per-round similarity means
        const auto window = static_cast<std::size_t>(config_.window);
        double sum = 0.0;
        std::size_t n = std::min(window, state_.report_history.size());
        for (std::size_t i = state_.report_history.size() - n;
             i < state_.report_history.size(); ++i)
            sum += state_.report_history[i].mean_max_neighbor_similarity;
        state_.rolling_similarity_series.push_back(sum / static_cast<double>(n));
    }

    RunReport build_report(StopReason reason) const {
        RunReport r;
        r.pool_size = static_cast<std::int64_t>(pool_.size());
        r.rounds = state_.round;
        r.stop_reason = reason;
        r.phase_timeline = state_.phase_timeline;
        r.expansion_ratio = state_.expansion_ratio_series;
        r.rolling_similarity = state_.rolling_similarity_series;
        r.acceptance_rate = state_.acceptance_rate_series;
        for (const RoundAggregates& agg : state_.report_history) {
            r.total_accepted += agg.accepted;
            r.total_rejected_similarity += agg.rejected_similarity;
            r.total_rejected_duplicate += agg.rejected_duplicate;
            r.total_rejected_nonexecutable += agg.rejected_nonexecutable;
        }
        for (std::size_t i = 1; i < state_.phase_timeline.size(); ++i)
            if (state_.phase_timeline[i] != state_.phase_timeline[i - 1]) ++r.phase_transitions;
        return r;
    }

    // ── persistence ─────────────────────────────────────────────

    nlohmann::json state_json() const {
        nlohmann::json history = nlohmann::json::array();
        for (const RoundAggregates& a : state_.report_history) {
            history.push_back({{"round", a.round},
                               {"phase", origin_name(a.phase)},
                               {"batch_size", a.batch_size},
                               {"executable_fraction", a.executable_fraction},
                               {"accepted", a.accepted},
                               {"rejected_parse", a.rejected_parse},
                               {"rejected_nonexecutable", a.rejected_nonexecutable},
                               {"rejected_duplicate", a.rejected_duplicate},
                               {"rejected_similarity", a.rejected_similarity},
                               {"mean_max_neighbor_similarity",
                                a.mean_max_neighbor_similarity}});
        }
        nlohmann::json timeline = nlohmann::json::array();
        for (Origin o : state_.phase_timeline) timeline.push_back(origin_name(o));
        return nlohmann::json{
            {"phase", origin_name(state_.phase)},
            {"round", state_.round},
            {"consecutive_gen_rounds", state_.consecutive_gen_rounds},
            {"report_history", history},
            {"phase_timeline", timeline},
            {"expansion_ratio_series", state_.expansion_ratio_series},
            {"rolling_similarity_series", state_.rolling_similarity_series},
            {"acceptance_rate_series", state_.acceptance_rate_series},
        };
    }

    void restore_state(const nlohmann::json& j) {
        const nlohmann::json& s = j.at("state");
        state_ = SchedulerState{};
        state_.phase = origin_from_name(s.at("phase").get<std::string>());
        state_.round = s.at("round").get<int>();
        state_.consecutive_gen_rounds = s.at("consecutive_gen_rounds").get<int>();
        for (const auto& a : s.at("report_history")) {
            RoundAggregates agg;
            agg.round = a.at("round").get<int>();
            agg.phase = origin_from_name(a.at("phase").get<std::string>());
            agg.batch_size = a.at("batch_size").get<int>();
            agg.executable_fraction = a.at("executable_fraction").get<double>();
            agg.accepted = a.at("accepted").get<int>();
            agg.rejected_parse = a.at("rejected_parse").get<int>();
            agg.rejected_nonexecutable = a.at("rejected_nonexecutable").get<int>();
            agg.rejected_duplicate = a.at("rejected_duplicate").get<int>();
            agg.rejected_similarity = a.at("rejected_similarity").get<int>();
            agg.mean_max_neighbor_similarity =
                a.at("mean_max_neighbor_similarity").get<double>();
            state_.report_history.push_back(agg);
        }
        for (const auto& p : s.at("phase_timeline"))
            state_.phase_timeline.push_back(origin_from_name(p.get<std::string>()));
        state_.expansion_ratio_series =
            s.at("expansion_ratio_series").get<std::vector<double>>();
        state_.rolling_similarity_series =
            s.at("rolling_similarity_series").get<std::vector<double>>();
        state_.acceptance_rate_series =
            s.at("acceptance_rate_series").get<std::vector<double>>();
        if (!state_.series_consistent())
            throw Error(ErrorCode::CheckpointError, "checkpoint series lengths disagree");
    }

    void write_checkpoint() const {
        if (checkpoint_path_.empty()) return;
        nlohmann::json j{
            {"version", kCheckpointVersion},
            {"seed", config_.seed},
            {"state", state_json()},
            {"gateway_counters", gateway_.sequence_counters()},
            {"pool_hash", std::to_string(pool_.content_hash())},
        };
        std::string tmp = checkpoint_path_ + ".tmp";
        {
            std::ofstream out(tmp, std::ios::trunc);
            if (!out) throw Error(ErrorCode::StorageError, "cannot write checkpoint " + tmp);
            out << j.dump(2);
        }
        std::filesystem::rename(tmp, checkpoint_path_);
    }

    void write_audit(const RoundLog& log) const {
        if (audit_path_.empty()) return;
        nlohmann::json tables = nlohmann::json::array();
        for (const std::string& t : log.tables) tables.push_back(t);
        nlohmann::json line{
            {"round", log.round},
            {"phase", origin_name(log.phase)},
            {"reason", phase_reason_name(log.reason)},
            {"forced_gen", log.forced_gen},
            {"tables", tables},
            {"batch_size", log.agg.batch_size},
            {"accepted", log.agg.accepted},
            {"rejected_parse", log.agg.rejected_parse},
            {"rejected_nonexecutable", log.agg.rejected_nonexecutable},
            {"rejected_duplicate", log.agg.rejected_duplicate},
            {"rejected_similarity", log.agg.rejected_similarity},
            {"executable_fraction", log.agg.executable_fraction},
            {"mean_max_neighbor_similarity", log.agg.mean_max_neighbor_similarity},
            {"pool_size", pool_.size()},
        };
        std::ofstream out(audit_path_, std::ios::app);
        out << line.dump() << "\n";
    }
};

}  // namespace sqlsynth
