// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "storyscene/clients/client.hpp"

namespace storyscene {

struct HttpResponse {
    int status = 0;  // 0: no response (connection failure or timeout)
    std::string body;
    std::string error;
};

class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse post(const std::string& path, const std::string& body,
                              const std::map<std::string, std::string>& headers, double timeout_seconds) = 0;
};

// cpp-httplib backed transport for http:// and https:// base URLs.
std::unique_ptr<HttpTransport> make_http_transport(const std::string& base_url);

/// POST with retry: no response, 408, 429 and 5xx are retried with
/// exponential backoff; any other 4xx is a ConfigError. Returns the 2xx
/// response; appends one line per retry to `retry_log`.
HttpResponse post_with_retry(HttpTransport& transport, const ClientConfig& config, const std::string& path,
                             const std::string& body, std::vector<std::string>& retry_log);

nlohmann::json build_chat_request(const std::vector<ChatMessage>& messages, const ClientConfig& config);

/// OpenAI-compatible chat-completions client.
class OpenAiChatClient final : public VlmClient {
public:
    // Throws ConfigError when the API key variable is named but unset.
    explicit OpenAiChatClient(ClientConfig config, std::unique_ptr<HttpTransport> transport = nullptr);

    ChatResult chat(const std::vector<ChatMessage>& messages) override;
    std::string model_id() const override { return config_.model; }

private:
    ClientConfig config_;
    std::string api_key_;
    std::unique_ptr<HttpTransport> transport_;
};

/// OpenAI-compatible images endpoint returning b64_json payloads.
class OpenAiImageClient final : public T2iClient {
public:
    explicit OpenAiImageClient(ClientConfig config, std::unique_ptr<HttpTransport> transport = nullptr);

    ImageResult generate_image(const std::string& prompt) override;
    std::string model_id() const override { return config_.model; }

private:
    ClientConfig config_;
    std::string api_key_;
    std::unique_ptr<HttpTransport> transport_;
};

}  // namespace storyscene
