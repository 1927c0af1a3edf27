// Copyright (c) 2026, T2J harness contributors
// SPDX-License-Identifier: Apache-2.0
//
// Provider-agnostic chat completion with named model roles, retry with
// exponential backoff, a per-role in-flight bound and an append-only run log.

#pragma once

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "t2j/error.hpp"
#include "t2j/parallel.hpp"
#include "t2j/prompt.hpp"

namespace t2j::llm {

enum class Role { Cheap, Costly };

inline std::string_view to_string(Role r) { return r == Role::Cheap ? "cheap" : "costly"; }

inline Role role_from_string(std::string_view s) {
    if (s == "cheap") return Role::Cheap;
    if (s == "costly") return Role::Costly;
    throw ConfigError("unknown model role \"" + std::string(s) + "\"");
}

struct GenerationParams {
    double temperature = 0.0;
    int max_tokens = 4096;

    bool operator==(const GenerationParams&) const = default;
};

struct ModelRole {
    Role role = Role::Cheap;
    std::string model_id;
    GenerationParams params;

    bool operator==(const ModelRole&) const = default;
};

struct ChatRequest {
    std::string model;
    std::string prompt;
    GenerationParams params;
};

/// Retryable failure (connection reset, 429, 5xx).
class TransientFailure : public TransportError { using TransportError::TransportError; };

/// Rejected credentials. Never retried.
class AuthFailure : public ConfigError { using ConfigError::ConfigError; };

/// A chat-completion backend. Implementations must be safe to call from
/// several threads at once.
class Provider {
public:
    virtual ~Provider() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
    virtual std::string name() const = 0;
};

struct LlmExchange {
    std::string prompt_digest;
    prompt::PromptKind prompt_kind = prompt::PromptKind::Standard;
    Role role = Role::Cheap;
    std::string model_id;
    std::string response;
    double latency_seconds = 0.0;
    int attempts = 0;
};

inline nlohmann::ordered_json to_json(const LlmExchange& x) {
    nlohmann::ordered_json j;
    j["type"] = "exchange";
    j["prompt_kind"] = prompt::to_string(x.prompt_kind);
    j["prompt_digest"] = x.prompt_digest;
    j["role"] = to_string(x.role);
    j["model"] = x.model_id;
    j["attempts"] = x.attempts;
    j["latency_seconds"] = x.latency_seconds;
    j["response"] = x.response;
    return j;
}

namespace detail {

inline std::vector<std::string>*& log_buffer() {
    thread_local std::vector<std::string>* buffer = nullptr;
    return buffer;
}

}  // namespace detail

/// Append-only line-delimited JSON log with serialized writes. A log without
/// a path keeps records in memory only.
///
/// Records appended inside ordered_for() are buffered per item and committed
/// in item order, so concurrent batches still produce a deterministic log.
class RunLog {
public:
    RunLog() = default;
    explicit RunLog(const std::filesystem::path& path) : path_(path) {
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        out_.open(path, std::ios::app | std::ios::binary);
        if (!out_) throw IoError("cannot open run log " + path.string());
    }

    void append(const nlohmann::ordered_json& record) {
        std::string line = record.dump();
        if (auto* buf = detail::log_buffer()) {
            buf->push_back(std::move(line));
            return;
        }
        std::lock_guard lock(mu_);
        write_locked(line);
    }

    std::vector<std::string> lines() const {
        std::lock_guard lock(mu_);
        return lines_;
    }

    /// parallel_for whose log records land in index order.
    template <typename Fn>
    void ordered_for(std::size_t n, std::size_t workers, Fn&& fn) {
        std::vector<std::optional<std::vector<std::string>>> done(n);
        std::size_t next = 0;
        std::mutex commit_mu;
        auto commit = [&](std::size_t i, std::vector<std::string> lines) {
            std::lock_guard c(commit_mu);
            done[i] = std::move(lines);
            std::lock_guard lock(mu_);
            while (next < n && done[next]) {
                for (const auto& l : *done[next]) write_locked(l);
                done[next].reset();
                ++next;
            }
        };
        parallel_for(n, workers, [&](std::size_t i) {
            std::vector<std::string> buf;
            auto* saved = detail::log_buffer();
            detail::log_buffer() = &buf;
            try {
                fn(i);
            } catch (...) {
                detail::log_buffer() = saved;
                commit(i, std::move(buf));
                throw;
            }
            detail::log_buffer() = saved;
            commit(i, std::move(buf));
        });
    }

private:
    void write_locked(const std::string& line) {
        if (out_.is_open()) {
            out_ << line << '\n';
            out_.flush();
            if (!out_) throw IoError("run log write failed: " + path_.string());
        }
        lines_.push_back(line);
    }

    mutable std::mutex mu_;
    std::filesystem::path path_;
    std::ofstream out_;
    std::vector<std::string> lines_;
};

namespace detail {

class Semaphore {
public:
    explicit Semaphore(std::size_t permits) : permits_(permits) {}
    void acquire() {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return permits_ > 0; });
        --permits_;
    }
    void release() {
        {
            std::lock_guard lock(mu_);
            ++permits_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mu_;
    std::condition_variable cv_;
    std::size_t permits_;
};

class Permit {
public:
    explicit Permit(Semaphore& s) : s_(s) { s_.acquire(); }
    Permit(const Permit&) = delete;
    Permit& operator=(const Permit&) = delete;
    ~Permit() { s_.release(); }

private:
    Semaphore& s_;
};

}  // namespace detail

struct ClientOptions {
    int max_attempts = 3;
    std::chrono::milliseconds base_backoff{500};
    std::size_t max_in_flight = 4;  // per role
    /// Seconds from an arbitrary epoch; injectable so mock runs are reproducible.
    std::function<double()> clock = [] {
        return std::chrono::duration<double>(
                   std::chrono::steady_clock::now().time_since_epoch())
            .count();
    };
};

class LlmClient {
public:
    LlmClient(std::shared_ptr<Provider> provider, std::vector<ModelRole> roles,
              ClientOptions options = {}, std::shared_ptr<RunLog> log = nullptr)
        : provider_(std::move(provider)),
          options_(std::move(options)),
          log_(log ? std::move(log) : std::make_shared<RunLog>()) {
        if (!provider_) throw ConfigError("LlmClient: no provider");
        if (options_.max_attempts < 1) throw ConfigError("LlmClient: max_attempts must be >= 1");
        if (options_.max_in_flight < 1) throw ConfigError("LlmClient: max_in_flight must be >= 1");
        for (auto& r : roles) {
            if (r.model_id.empty()) {
                throw ConfigError("model role " + std::string(to_string(r.role)) +
                                  " has no model id");
            }
            roles_[r.role] = r;
            gates_.emplace(r.role, std::make_unique<detail::Semaphore>(options_.max_in_flight));
        }
    }

    const ModelRole& role(Role r) const {
        auto it = roles_.find(r);
        if (it == roles_.end()) {
            throw ConfigError("model role " + std::string(to_string(r)) + " is not configured");
        }
        return it->second;
    }

    bool has_role(Role r) const { return roles_.count(r) != 0; }
    std::size_t max_in_flight() const { return options_.max_in_flight; }
    RunLog& log() { return *log_; }
    const Provider& provider() const { return *provider_; }

    /// Sends `prompt` to the model bound to `r`. The exchange is written to
    /// the run log before it is returned.
    LlmExchange complete(const prompt::RenderedPrompt& prompt, Role r) {
        const ModelRole& mr = role(r);
        detail::Permit permit(*gates_.at(r));

        ChatRequest req{mr.model_id, prompt.text, mr.params};
        std::string last_error;
        for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
            const double start = options_.clock();
            try {
                std::string response = provider_->complete(req);
                const double elapsed = std::max(0.0, options_.clock() - start);
                if (response.empty()) {
                    log_failure(prompt, mr, attempt, "empty response");
                    throw ProviderError("provider " + provider_->name() +
                                        " returned an empty response for model " + mr.model_id);
                }
                LlmExchange x{prompt.inputs_digest, prompt.kind, r,      mr.model_id,
                              std::move(response),  elapsed,     attempt};
                log_->append(to_json(x));
                return x;
            } catch (const TransientFailure& e) {
                last_error = e.what();
                if (attempt < options_.max_attempts && options_.base_backoff.count() > 0) {
                    std::this_thread::sleep_for(options_.base_backoff * (1LL << (attempt - 1)));
                }
            } catch (const ConfigError& e) {
                log_failure(prompt, mr, attempt, e.what());
                throw;
            }
        }
        log_failure(prompt, mr, options_.max_attempts, last_error);
        throw TransportError("model " + mr.model_id + ": giving up after " +
                             std::to_string(options_.max_attempts) +
                             " attempts: " + last_error);
    }

private:
    void log_failure(const prompt::RenderedPrompt& p, const ModelRole& mr, int attempts,
                     const std::string& why) {
        nlohmann::ordered_json j;
        j["type"] = "exchange_failure";
        j["prompt_kind"] = prompt::to_string(p.kind);
        j["prompt_digest"] = p.inputs_digest;
        j["role"] = to_string(mr.role);
        j["model"] = mr.model_id;
        j["attempts"] = attempts;
        j["error"] = why;
        log_->append(j);
    }

    std::shared_ptr<Provider> provider_;
    ClientOptions options_;
    std::shared_ptr<RunLog> log_;
    std::map<Role, ModelRole> roles_;
    std::map<Role, std::unique_ptr<detail::Semaphore>> gates_;
};

// ---------------------------------------------------------------------------
// Code extraction

namespace detail {

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n\f\v");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n\f\v");
    return std::string(s.substr(first, last - first + 1));
}

inline bool is_fence_line(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    return line.substr(i, 3) == "```";
}

}  // namespace detail

/// Code snippet from an LLM answer: the longest fenced block (the first one
/// wins ties), or the whole answer trimmed when there is no fence.
inline std::string extract_code(std::string_view response) {
    std::vector<std::string> blocks;
    std::optional<std::string> current;
    std::size_t pos = 0;
    while (pos <= response.size()) {
        std::size_t nl = response.find('\n', pos);
        if (nl == std::string_view::npos) nl = response.size();
        std::string_view line = response.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (detail::is_fence_line(line)) {
            if (current) {
                blocks.push_back(std::move(*current));
                current.reset();
            } else {
                current.emplace();
            }
        } else if (current) {
            *current += line;
            *current += '\n';
        }
        pos = nl + 1;
    }
    if (current) blocks.push_back(std::move(*current));  // unterminated fence

    if (blocks.empty()) return detail::trim(response);
    const std::string* best = &blocks.front();
    for (const auto& b : blocks) {
        if (detail::trim(b).size() > detail::trim(*best).size()) best = &b;
    }
    return detail::trim(*best);
}

}  // namespace t2j::llm
