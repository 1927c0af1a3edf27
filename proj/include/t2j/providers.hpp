// Copyright (c) 2026, T2J harness contributors
// SPDX-License-Identifier: Apache-2.0
//
// Concrete providers: an OpenAI-compatible HTTP chat-completions endpoint and
// a callback-backed provider for scripted tests.

#pragma once

#include <cstdlib>
#include <functional>
#include <string>
#include <utility>

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
#include <json.hpp>

#include "t2j/llm_client.hpp"

namespace t2j::llm {

/// Wraps a callable; handy for scripted mocks.
class ScriptedProvider final : public Provider {
public:
    using Fn = std::function<std::string(const ChatRequest&)>;
    explicit ScriptedProvider(Fn fn, std::string name = "scripted")
        : fn_(std::move(fn)), name_(std::move(name)) {}
    std::string complete(const ChatRequest& request) override { return fn_(request); }
    std::string name() const override { return name_; }

private:
    Fn fn_;
    std::string name_;
};

/// POSTs {base_url}/chat/completions with a single user message.
///
/// Status handling: 401/403 raise AuthFailure, 408/409/429/5xx and
/// connection errors raise TransientFailure, other non-2xx raise
/// ProviderError.
class HttpProvider final : public Provider {
public:
    HttpProvider(std::string base_url, std::string api_key, int timeout_seconds = 300)
        : api_key_(std::move(api_key)), timeout_seconds_(timeout_seconds) {
        while (!base_url.empty() && base_url.back() == '/') base_url.pop_back();
        const auto scheme_end = base_url.find("://");
        if (scheme_end == std::string::npos) {
            throw ConfigError("endpoint URL must include a scheme: " + base_url);
        }
        const auto path_start = base_url.find('/', scheme_end + 3);
        origin_ = base_url.substr(0, path_start);
        path_prefix_ = path_start == std::string::npos ? "" : base_url.substr(path_start);
    }

    /// Reads T2J_API_BASE (default https://openrouter.ai/api/v1) and T2J_API_KEY.
    static std::shared_ptr<HttpProvider> from_env() {
        const char* base = std::getenv("T2J_API_BASE");
        const char* key = std::getenv("T2J_API_KEY");
        if (!key || !*key) throw ConfigError("T2J_API_KEY is not set");
        return std::make_shared<HttpProvider>(
            base && *base ? base : "https://openrouter.ai/api/v1", key);
    }

    std::string complete(const ChatRequest& request) override {
        nlohmann::json body = {
            {"model", request.model},
            {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
            {"temperature", request.params.temperature},
            {"max_tokens", request.params.max_tokens},
        };
        httplib::Client cli(origin_);
        cli.set_connection_timeout(30);
        cli.set_read_timeout(timeout_seconds_);
        cli.set_write_timeout(60);
        httplib::Headers headers;
        if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

        auto res = cli.Post(path_prefix_ + "/chat/completions", headers, body.dump(),
                            "application/json");
        if (!res) {
            throw TransientFailure("request to " + origin_ + " failed: " +
                                   httplib::to_string(res.error()));
        }
        const int status = res->status;
        if (status == 401 || status == 403) {
            throw AuthFailure("endpoint rejected credentials (HTTP " + std::to_string(status) +
                              ")");
        }
        if (status == 408 || status == 409 || status == 429 || status >= 500) {
            throw TransientFailure("HTTP " + std::to_string(status));
        }
        if (status < 200 || status >= 300) {
            throw ProviderError("HTTP " + std::to_string(status) + ": " + res->body);
        }
        nlohmann::json reply;
        try {
            reply = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw ProviderError(std::string("malformed completion body: ") + e.what());
        }
        const auto& choices = reply.value("choices", nlohmann::json::array());
        if (!choices.is_array() || choices.empty()) {
            throw ProviderError("completion has no choices");
        }
        const auto& content = choices[0]["message"]["content"];
        return content.is_string() ? content.get<std::string>() : std::string{};
    }

    std::string name() const override { return "http:" + origin_; }

private:
    std::string origin_;
    std::string path_prefix_;
    std::string api_key_;
    int timeout_seconds_;
};

}  // namespace t2j::llm
