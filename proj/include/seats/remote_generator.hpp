#pragma once

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "seats/config.hpp"
#include "seats/generation.hpp"

namespace seats {

/// Client for a chat-completion-compatible HTTP endpoint. Transient
/// failures (transport errors, 429, 5xx) are retried with exponential
/// backoff; a retried request carries a byte-identical payload. Retries
/// within one logical call count once toward the call ledger.
class RemoteGenerator : public Generator {
  public:
    explicit RemoteGenerator(const GeneratorSettings& settings) : settings_(settings) {
        if (const char* key = std::getenv("SEATS_API_KEY"); key && *key) api_key_ = key;
    }

    std::string complete(const GenerationRequest& request) override {
        const std::string payload = build_payload(request);
        std::string last_error;
        for (int attempt = 1; attempt <= settings_.max_attempts; ++attempt) {
            if (attempt > 1) {
                double delay = settings_.initial_backoff_seconds * std::pow(2.0, attempt - 2);
                std::this_thread::sleep_for(std::chrono::duration<double>(delay));
            }
            httplib::Client client(settings_.endpoint_url);
            client.set_connection_timeout(30, 0);
            client.set_read_timeout(600, 0);
            httplib::Headers headers;
            if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
            auto res = client.Post(settings_.endpoint_path, headers, payload, "application/json");
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status == 429 || res->status >= 500) {
                last_error = "HTTP " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200)
                throw GenerationError("endpoint returned HTTP " + std::to_string(res->status) + ": " + res->body);
            return extract_content(res->body);
        }
        throw GenerationError("request failed after " + std::to_string(settings_.max_attempts) +
                              " attempts: " + last_error);
    }

    /// The request body; built once per logical call so retries are
    /// byte-identical.
    std::string build_payload(const GenerationRequest& request) const {
        json messages = json::array();
        messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
        messages.push_back({{"role", "user"}, {"content", request.user_prompt}});
        json body{{"messages", messages}, {"model", settings_.model}, {"temperature", request.temperature}};
        if (request.max_output_chars > 0) body["max_tokens"] = request.max_output_chars / 4;
        return body.dump();
    }

  private:
    static std::string extract_content(const std::string& body) {
        json j;
        try {
            j = json::parse(body);
        } catch (const json::exception&) {
            throw GenerationError("endpoint returned unparseable JSON");
        }
        try {
            return j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception&) {
            throw GenerationError("endpoint response missing choices[0].message.content");
        }
    }

    GeneratorSettings settings_;
    std::string api_key_;
};

} // namespace seats
