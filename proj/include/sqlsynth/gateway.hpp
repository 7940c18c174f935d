// Copyright 2026 The sqlsynth Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqlsynth/embedding.hpp"
#include "sqlsynth/error.hpp"

namespace sqlsynth {

// Uniform completion interface over three backends: an OpenAI-compatible
// chat-completions endpoint (remote or a local inference server speaking the
// same protocol), and a deterministic scripted backend for tests. Every
// request carries a deadline; transient transport failures are retried with
// exponential backoff.

enum class ModelRole { Generator, Expander, Reasoner };

inline const char* model_role_name(ModelRole r) {
    switch (r) {
        case ModelRole::Generator: return "generator";
        case ModelRole::Expander: return "expander";
        case ModelRole::Reasoner: return "reasoner";
    }
    return "?";
}

struct CompletionRequest {
    std::string prompt;
    double temperature = -1.0;  // role default applied when negative
    double top_p = 0.95;
    int max_tokens = 2048;
    ModelRole role = ModelRole::Generator;
};

struct CompletionResponse {
    std::string text;
    int prompt_tokens = 0;
    int completion_tokens = 0;
};

/// Transient transport failure; the gateway retries these.
class TransportError : public Error {
public:
    explicit TransportError(std::string message)
        : Error(ErrorCode::GatewayError, std::move(message)) {}
};

class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;

    /// `sequence_index` is the per-role call counter maintained by the
    /// gateway; scripted backends key their replay on it.
    virtual CompletionResponse complete(const CompletionRequest& request,
                                        std::uint64_t sequence_index) = 0;
};

// ── scripted backend ────────────────────────────────────────────

/// Deterministic replay fixture: entries match by prompt hash or by
/// role + sequence index. A missed lookup is a test bug, not a model failure.
class ScriptedBackend final : public CompletionBackend {
public:
    struct Entry {
        std::optional<ModelRole> role;
        std::optional<std::uint64_t> index;
        std::optional<std::uint64_t> prompt_hash;
        std::string response;
    };

    void add(Entry entry) {
        std::lock_guard lock(mutex_);
        entries_.push_back(std::move(entry));
    }

    void add_sequence(ModelRole role, std::vector<std::string> responses) {
        std::lock_guard lock(mutex_);
        for (std::size_t i = 0; i < responses.size(); ++i)
            entries_.push_back(Entry{role, i, std::nullopt, std::move(responses[i])});
    }

    static std::uint64_t hash_prompt(std::string_view prompt) {
        return detail::fnv1a64(prompt);
    }

    CompletionResponse complete(const CompletionRequest& request,
                                std::uint64_t sequence_index) override {
        std::lock_guard lock(mutex_);
        std::uint64_t prompt_hash = hash_prompt(request.prompt);
        for (const Entry& e : entries_) {
            if (e.prompt_hash && *e.prompt_hash == prompt_hash) return {e.response};
            if (e.index && *e.index == sequence_index &&
                (!e.role || *e.role == request.role))
                return {e.response};
        }
        throw Error(ErrorCode::FixtureMiss,
                    std::string("no scripted response for role=") +
                        model_role_name(request.role) + " index=" +
                        std::to_string(sequence_index));
    }

private:
    std::mutex mutex_;
    std::vector<Entry> entries_;
};

/// Scripted backend driven by a function of (role, sequence index, prompt).
/// Deterministic as long as the function is.
class CallbackBackend final : public CompletionBackend {
public:
    using Fn = std::function<std::string(ModelRole, std::uint64_t, const std::string&)>;

    explicit CallbackBackend(Fn fn) : fn_(std::move(fn)) {}

    CompletionResponse complete(const CompletionRequest& request,
                                std::uint64_t sequence_index) override {
        std::lock_guard lock(mutex_);
        return {fn_(request.role, sequence_index, request.prompt)};
    }

private:
    std::mutex mutex_;
    Fn fn_;
};

// ── HTTP backend (OpenAI-compatible chat completions) ───────────

struct HttpBackendConfig {
    std::string base_url;  // e.g. "http://localhost:8000"
    std::string api_key;   // from environment, never from config files
    std::string model;
    std::chrono::milliseconds timeout{120000};
};

namespace detail {

/// POST a JSON body; provided as a function hook so tests can fake the wire.
using HttpPostFn = std::function<std::string(const HttpBackendConfig&, const std::string& path,
                                             const std::string& body)>;

std::string default_http_post(const HttpBackendConfig& config, const std::string& path,
                              const std::string& body);

}  // namespace detail

class HttpBackend final : public CompletionBackend {
public:
    explicit HttpBackend(HttpBackendConfig config, detail::HttpPostFn post = {})
        : config_(std::move(config)), post_(post ? std::move(post) : nullptr) {}

    CompletionResponse complete(const CompletionRequest& request, std::uint64_t) override {
        nlohmann::json body = {
            {"model", config_.model},
            {"messages", nlohmann::json::array({nlohmann::json{
                             {"role", "user"}, {"content", request.prompt}}})},
            {"temperature", request.temperature},
            {"top_p", request.top_p},
            {"max_tokens", request.max_tokens},
        };
        std::string raw = post_ ? post_(config_, "/v1/chat/completions", body.dump())
                                : detail::default_http_post(config_, "/v1/chat/completions",
                                                            body.dump());
        nlohmann::json parsed = nlohmann::json::parse(raw, nullptr, false);
        if (parsed.is_discarded())
            throw TransportError("malformed completion response");
        if (!parsed.contains("choices") || parsed["choices"].empty())
            throw Error(ErrorCode::GatewayError,
                        "completion response has no choices: " + raw.substr(0, 200));
        CompletionResponse out;
        out.text = parsed["choices"][0]["message"]["content"].get<std::string>();
        if (parsed.contains("usage")) {
            out.prompt_tokens = parsed["usage"].value("prompt_tokens", 0);
            out.completion_tokens = parsed["usage"].value("completion_tokens", 0);
        }
        return out;
    }

private:
    HttpBackendConfig config_;
    detail::HttpPostFn post_;
};

// ── gateway ─────────────────────────────────────────────────────

struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds initial_backoff{200};
    double multiplier = 2.0;
};

struct GatewayOptions {
    double generator_temperature = 0.8;
    double expander_temperature = 0.8;
    double reasoner_temperature = 0.3;
    double top_p = 0.95;
    int max_tokens = 2048;
    RetryPolicy retry;
    int max_in_flight = 4;
    std::string transcript_path;  // jsonl; empty disables logging
};

class LlmGateway {
public:
    explicit LlmGateway(GatewayOptions options = GatewayOptions())
        : options_(options),
          in_flight_(options.max_in_flight > 0 ? options.max_in_flight : 1) {}

    void set_backend(ModelRole role, std::shared_ptr<CompletionBackend> backend) {
        backends_[role] = std::move(backend);
    }

    double role_temperature(ModelRole role) const {
        switch (role) {
            case ModelRole::Generator: return options_.generator_temperature;
            case ModelRole::Expander: return options_.expander_temperature;
            case ModelRole::Reasoner: return options_.reasoner_temperature;
        }
        return 0.0;
    }

    /// Complete a prompt under the role's sampling defaults, with bounded
    /// retries on transport failures.
    std::string complete(ModelRole role, const std::string& prompt) {
        CompletionRequest request;
        request.prompt = prompt;
        request.role = role;
        request.temperature = role_temperature(role);
        request.top_p = options_.top_p;
        request.max_tokens = options_.max_tokens;
        return complete(request).text;
    }

    CompletionResponse complete(CompletionRequest request) {
        auto it = backends_.find(request.role);
        if (it == backends_.end() || !it->second)
            throw Error(ErrorCode::ConfigError,
                        std::string("no backend configured for role ") +
                            model_role_name(request.role));
        if (request.temperature < 0) request.temperature = role_temperature(request.role);

        std::uint64_t seq = sequence_counters_[request.role]++;
        auto start = std::chrono::steady_clock::now();
        int attempts = 0;
        std::chrono::milliseconds backoff = options_.retry.initial_backoff;
        while (true) {
            try {
                in_flight_.acquire();
                struct Release {
                    std::counting_semaphore<>* s;
                    ~Release() { s->release(); }
                } release{&in_flight_};
                CompletionResponse response = it->second->complete(request, seq);
                log_transcript(request, response, start, attempts);
                return response;
            } catch (const TransportError& e) {
                ++attempts;
                if (attempts > options_.retry.max_retries)
                    throw Error(ErrorCode::GatewayError,
                                std::string("retries exhausted: ") + e.what());
                std::this_thread::sleep_for(backoff);
                backoff = std::chrono::milliseconds(static_cast<std::int64_t>(
                    static_cast<double>(backoff.count()) * options_.retry.multiplier));
            }
        }
    }

    /// Per-role call counters; checkpointed so scripted replay survives
    /// resume.
    std::map<std::string, std::uint64_t> sequence_counters() const {
        std::map<std::string, std::uint64_t> out;
        for (const auto& [role, counter] : sequence_counters_)
            out[model_role_name(role)] = counter;
        return out;
    }

    void restore_sequence_counters(const std::map<std::string, std::uint64_t>& counters) {
        for (ModelRole role :
             {ModelRole::Generator, ModelRole::Expander, ModelRole::Reasoner}) {
            if (auto it = counters.find(model_role_name(role)); it != counters.end())
                sequence_counters_[role] = it->second;
        }
    }

    int retries_logged() const { return total_retries_; }

private:
    GatewayOptions options_;
    std::map<ModelRole, std::shared_ptr<CompletionBackend>> backends_;
    std::map<ModelRole, std::uint64_t> sequence_counters_;
    std::counting_semaphore<> in_flight_;
    std::mutex log_mutex_;
    int total_retries_ = 0;

    void log_transcript(const CompletionRequest& request, const CompletionResponse& response,
                        std::chrono::steady_clock::time_point start, int retries) {
        total_retries_ += retries;
        if (options_.transcript_path.empty()) return;
        auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - start);
        nlohmann::json line = {
            {"role", model_role_name(request.role)},
            {"prompt_hash", detail::fnv1a64(request.prompt)},
            {"response_hash", detail::fnv1a64(response.text)},
            {"latency_ms", latency.count()},
            {"prompt_tokens", response.prompt_tokens},
            {"completion_tokens", response.completion_tokens},
            {"retries", retries},
        };
        std::lock_guard lock(log_mutex_);
        std::ofstream out(options_.transcript_path, std::ios::app);
        out << line.dump() << "\n";
    }
};

// ── SQL extraction ──────────────────────────────────────────────

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline bool starts_with_ci(std::string_view s, std::string_view prefix) {
    if (s.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
    return true;
}

/// "with" only counts as a statement start when it looks like a CTE header
/// (WITH name AS ...), not the English word.
inline bool looks_like_cte(std::string_view rest) {
    if (!starts_with_ci(rest, "with")) return false;
    std::size_t i = 4;
    while (i < rest.size() && std::isspace(static_cast<unsigned char>(rest[i]))) ++i;
    std::size_t name_start = i;
    while (i < rest.size() && (std::isalnum(static_cast<unsigned char>(rest[i])) ||
                               rest[i] == '_'))
        ++i;
    if (i == name_start) return false;
    std::string_view after = rest.substr(i);
    std::size_t j = 0;
    while (j < after.size() && std::isspace(static_cast<unsigned char>(after[j]))) ++j;
    if (starts_with_ci(after.substr(j), "recursive")) return true;
    return starts_with_ci(after.substr(j), "as") || after.substr(j, 1) == "(";
}

/// Statements from one blob: split on ';', keep pieces that contain a SELECT
/// or a CTE-shaped WITH, starting the statement at that keyword (prose and
/// list markers before it are dropped).
inline void split_statements(std::string_view blob, std::vector<std::string>& out) {
    std::size_t start = 0;
    while (start <= blob.size()) {
        std::size_t semi = blob.find(';', start);
        std::string_view piece =
            semi == std::string_view::npos ? blob.substr(start) : blob.substr(start, semi - start);
        std::size_t at = std::string_view::npos;
        for (std::size_t i = 0; i < piece.size(); ++i) {
            if (i > 0 && (std::isalnum(static_cast<unsigned char>(piece[i - 1])) ||
                          piece[i - 1] == '_'))
                continue;
            std::string_view rest = piece.substr(i);
            if (starts_with_ci(rest, "select") || looks_like_cte(rest)) {
                at = i;
                break;
            }
        }
        if (at != std::string_view::npos) {
            std::string stmt = trim(piece.substr(at));
            if (!stmt.empty()) out.push_back(std::move(stmt));
        }
        if (semi == std::string_view::npos) break;
        start = semi + 1;
    }
}

}  // namespace detail

/// Pull SQL statements out of model output: fenced code blocks first, else
/// numbered or semicolon-separated statements. Trailing semicolons trimmed,
/// empties dropped. An empty result is a valid outcome.
inline std::vector<std::string> extract_sql(std::string_view response) {
    std::vector<std::string> out;
    std::size_t fence = response.find("```");
    if (fence != std::string_view::npos) {
        std::size_t pos = 0;
        while ((pos = response.find("```", pos)) != std::string_view::npos) {
            std::size_t body_start = response.find('\n', pos);
            if (body_start == std::string_view::npos) break;
            std::size_t close = response.find("```", body_start);
            if (close == std::string_view::npos) break;
            detail::split_statements(response.substr(body_start, close - body_start), out);
            pos = close + 3;
        }
        return out;
    }
    detail::split_statements(response, out);
    return out;
}

}  // namespace sqlsynth

// httplib is heavy; keep its inclusion behind the default post hook so test
// binaries that fake the wire don't pay for it.
#ifndef SQLSYNTH_NO_HTTPLIB
#include <httplib.h>

// glibc's resolv.h (dragged in via httplib's socket headers) defines _res,
// which collides with Eigen parameter names.
#ifdef _res
#undef _res
#endif

namespace sqlsynth::detail {

inline std::string default_http_post(const HttpBackendConfig& config, const std::string& path,
                                     const std::string& body) {
    httplib::Client client(config.base_url);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(
        config.timeout));
    client.set_read_timeout(config.timeout);
    client.set_write_timeout(config.timeout);
    httplib::Headers headers;
    if (!config.api_key.empty())
        headers.emplace("Authorization", "Bearer " + config.api_key);
    auto result = client.Post(path, headers, body, "application/json");
    if (!result)
        throw TransportError("transport failure: " + httplib::to_string(result.error()));
    if (result->status == 429 || result->status >= 500)
        throw TransportError("server unavailable: status " + std::to_string(result->status));
    if (result->status != 200)
        throw Error(ErrorCode::GatewayError,
                    "completion request failed: status " + std::to_string(result->status) +
                        " body " + result->body.substr(0, 200));
    return result->body;
}

}  // namespace sqlsynth::detail
#else
namespace sqlsynth::detail {

inline std::string default_http_post(const HttpBackendConfig&, const std::string&,
                                     const std::string&) {
    throw Error(ErrorCode::ConfigError, "HTTP transport disabled in this build");
}

}  // namespace sqlsynth::detail
#endif
