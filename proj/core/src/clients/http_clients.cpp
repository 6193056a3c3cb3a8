// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "storyscene/clients/http_clients.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "storyscene/error.hpp"
#include "storyscene/hash.hpp"

namespace storyscene {

namespace {

class HttplibTransport final : public HttpTransport {
public:
    explicit HttplibTransport(std::string base_url) : base_url_(std::move(base_url)) {}

    HttpResponse post(const std::string& path, const std::string& body,
                      const std::map<std::string, std::string>& headers, double timeout_seconds) override {
        httplib::Client client(base_url_);
        const auto sec = static_cast<time_t>(timeout_seconds);
        const auto usec = static_cast<time_t>((timeout_seconds - static_cast<double>(sec)) * 1e6);
        client.set_connection_timeout(sec, usec);
        client.set_read_timeout(sec, usec);
        client.set_write_timeout(sec, usec);
        httplib::Headers h;
        for (const auto& [k, v] : headers) h.emplace(k, v);
        auto res = client.Post(path, h, body, "application/json");
        if (!res) return {0, {}, httplib::to_string(res.error())};
        return {res->status, res->body, {}};
    }

private:
    std::string base_url_;
};

std::map<std::string, std::string> auth_headers(const std::string& api_key) {
    std::map<std::string, std::string> h;
    if (!api_key.empty()) h["Authorization"] = "Bearer " + api_key;
    return h;
}

std::string resolve_api_key(const ClientConfig& config) {
    if (config.api_key_env.empty()) return {};
    const char* v = std::getenv(config.api_key_env.c_str());
    if (v == nullptr || *v == '\0') {
        throw ConfigError("API key environment variable " + config.api_key_env + " is not set");
    }
    return v;
}

bool retryable(int status) { return status == 0 || status == 408 || status == 429 || status >= 500; }

nlohmann::json parse_body(const HttpResponse& res) {
    try {
        return nlohmann::json::parse(res.body);
    } catch (const nlohmann::json::exception& e) {
        throw TransportError(std::string("malformed JSON reply: ") + e.what(), res.body);
    }
}

}  // namespace

std::unique_ptr<HttpTransport> make_http_transport(const std::string& base_url) {
    return std::make_unique<HttplibTransport>(base_url);
}

HttpResponse post_with_retry(HttpTransport& transport, const ClientConfig& config, const std::string& path,
                             const std::string& body, std::vector<std::string>& retry_log) {
    const std::string api_key = resolve_api_key(config);
    const auto headers = auth_headers(api_key);
    HttpResponse last;
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
        if (attempt > 0) {
            const double delay_ms = config.backoff_initial_ms * std::pow(2.0, attempt - 1);
            std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(delay_ms));
        }
        last = transport.post(path, body, headers, config.timeout_seconds);
        if (last.status >= 200 && last.status < 300) return last;
        if (!retryable(last.status)) {
            throw ConfigError("request to " + path + " rejected with HTTP " + std::to_string(last.status) +
                              ": " + last.body);
        }
        const std::string reason = last.status == 0 ? "no response (" + last.error + ")"
                                                    : "HTTP " + std::to_string(last.status);
        if (attempt < config.max_retries) {
            retry_log.push_back("attempt " + std::to_string(attempt + 1) + ": " + reason);
        }
    }
    throw TransportError("request to " + path + " failed after " + std::to_string(config.max_retries + 1) +
                             " attempts: " + (last.status == 0 ? last.error : "HTTP " + std::to_string(last.status)),
                         last.body);
}

nlohmann::json build_chat_request(const std::vector<ChatMessage>& messages, const ClientConfig& config) {
    nlohmann::json msgs = nlohmann::json::array();
    for (const auto& m : messages) {
        if (m.images.empty()) {
            msgs.push_back({{"role", m.role}, {"content", m.text}});
            continue;
        }
        nlohmann::json parts = nlohmann::json::array();
        parts.push_back({{"type", "text"}, {"text", m.text}});
        for (const auto& img : m.images) {
            parts.push_back({{"type", "image_url"},
                             {"image_url", {{"url", "data:image/png;base64," + base64_encode(img.png)}}}});
        }
        msgs.push_back({{"role", m.role}, {"content", parts}});
    }
    return {{"model", config.model}, {"messages", msgs}, {"temperature", config.temperature}};
}

OpenAiChatClient::OpenAiChatClient(ClientConfig config, std::unique_ptr<HttpTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
    config_.validate();
    api_key_ = resolve_api_key(config_);
    if (!transport_) transport_ = make_http_transport(config_.base_url);
}

ChatResult OpenAiChatClient::chat(const std::vector<ChatMessage>& messages) {
    if (messages.empty()) throw InputError("chat: no messages");
    ChatResult result;
    result.transcript.messages = messages;
    const HttpResponse res = post_with_retry(*transport_, config_, config_.chat_path,
                                             build_chat_request(messages, config_).dump(),
                                             result.transcript.retry_log);
    const nlohmann::json reply = parse_body(res);
    try {
        const auto& content = reply.at("choices").at(0).at("message").at("content");
        if (content.is_string()) {
            result.text = content.get<std::string>();
        } else {
            for (const auto& part : content) {
                if (part.value("type", "") == "text") result.text += part.at("text").get<std::string>();
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw TransportError(std::string("unexpected chat reply shape: ") + e.what(), res.body);
    }
    if (reply.contains("usage")) result.transcript.usage = reply["usage"];
    result.transcript.messages.push_back({"assistant", result.text, {}});
    return result;
}

OpenAiImageClient::OpenAiImageClient(ClientConfig config, std::unique_ptr<HttpTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
    config_.validate();
    api_key_ = resolve_api_key(config_);
    if (!transport_) transport_ = make_http_transport(config_.base_url);
}

ImageResult OpenAiImageClient::generate_image(const std::string& prompt) {
    if (prompt.empty()) throw InputError("generate_image: empty prompt");
    const nlohmann::json body = {{"model", config_.model},
                                 {"prompt", prompt},
                                 {"n", 1},
                                 {"size", config_.image_size},
                                 {"response_format", "b64_json"}};
    ImageResult result;
    const HttpResponse res = post_with_retry(*transport_, config_, config_.images_path, body.dump(), result.retry_log);
    const nlohmann::json reply = parse_body(res);
    try {
        result.png = base64_decode(reply.at("data").at(0).at("b64_json").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw TransportError(std::string("unexpected image reply shape: ") + e.what(), res.body);
    } catch (const InputError& e) {
        throw TransportError(std::string("image payload: ") + e.what(), res.body);
    }
    return result;
}

}  // namespace storyscene
