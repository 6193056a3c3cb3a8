// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

namespace storyscene {

struct ImageAttachment {
    std::string name;
    std::string digest;
    // Payload sent inline as a base64 data URL; not persisted in transcripts.
    std::vector<std::uint8_t> png;

    static ImageAttachment from_png(std::string name, std::vector<std::uint8_t> png);
    friend bool operator==(const ImageAttachment& a, const ImageAttachment& b) {
        return a.name == b.name && a.digest == b.digest;
    }
};

struct ChatMessage {
    std::string role;
    std::string text;
    std::vector<ImageAttachment> images;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct ChatTranscript {
    std::string stage;
    std::vector<ChatMessage> messages;
    nlohmann::json usage = nlohmann::json::object();
    std::vector<std::string> retry_log;

    // Optional leading system message, then user/assistant alternating from user.
    bool roles_valid() const;
    friend bool operator==(const ChatTranscript&, const ChatTranscript&) = default;
};

void to_json(nlohmann::json& j, const ImageAttachment& a);
void from_json(const nlohmann::json& j, ImageAttachment& a);
void to_json(nlohmann::json& j, const ChatMessage& m);
void from_json(const nlohmann::json& j, ChatMessage& m);
void to_json(nlohmann::json& j, const ChatTranscript& t);
void from_json(const nlohmann::json& j, ChatTranscript& t);

std::string message_digest(const std::vector<ChatMessage>& messages);

struct ChatResult {
    std::string text;
    ChatTranscript transcript;  // request messages plus the assistant reply
};

class VlmClient {
public:
    virtual ~VlmClient() = default;
    virtual ChatResult chat(const std::vector<ChatMessage>& messages) = 0;
    virtual std::string model_id() const = 0;
};

struct ImageResult {
    std::vector<std::uint8_t> png;
    std::vector<std::string> retry_log;
};

class T2iClient {
public:
    virtual ~T2iClient() = default;
    virtual ImageResult generate_image(const std::string& prompt) = 0;
    virtual std::string model_id() const = 0;
};

struct ClientConfig {
    std::string provider = "mock";  // "mock" or "openai"
    std::string base_url;
    std::string model;
    std::string api_key_env;
    double timeout_seconds = 60.0;
    int max_retries = 3;
    double temperature = 0.0;
    double backoff_initial_ms = 500.0;
    std::string chat_path = "/v1/chat/completions";
    std::string images_path = "/v1/images/generations";
    std::string image_size = "1024x1024";

    // Throws ConfigError on timeout <= 0 or retries < 0.
    void validate() const;
};

std::unique_ptr<VlmClient> make_vlm_client(const ClientConfig& config);
std::unique_ptr<T2iClient> make_t2i_client(const ClientConfig& config);

}  // namespace storyscene
