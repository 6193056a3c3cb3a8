// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#include "storyscene/clients/client.hpp"

#include "storyscene/clients/http_clients.hpp"
#include "storyscene/clients/mock_clients.hpp"
#include "storyscene/error.hpp"
#include "storyscene/hash.hpp"

namespace storyscene {

ImageAttachment ImageAttachment::from_png(std::string name, std::vector<std::uint8_t> png) {
    ImageAttachment a;
    a.name = std::move(name);
    a.digest = hex64(fnv1a64(png));
    a.png = std::move(png);
    return a;
}

bool ChatTranscript::roles_valid() const {
    std::size_t i = 0;
    if (!messages.empty() && messages[0].role == "system") ++i;
    const char* expected = "user";
    for (; i < messages.size(); ++i) {
        if (messages[i].role != expected) return false;
        expected = std::string(expected) == "user" ? "assistant" : "user";
    }
    return true;
}

void to_json(nlohmann::json& j, const ImageAttachment& a) {
    j = nlohmann::json{{"name", a.name}, {"digest", a.digest}};
}

void from_json(const nlohmann::json& j, ImageAttachment& a) {
    j.at("name").get_to(a.name);
    j.at("digest").get_to(a.digest);
    a.png.clear();
}

void to_json(nlohmann::json& j, const ChatMessage& m) {
    j = nlohmann::json{{"role", m.role}, {"text", m.text}};
    if (!m.images.empty()) j["images"] = m.images;
}

void from_json(const nlohmann::json& j, ChatMessage& m) {
    j.at("role").get_to(m.role);
    j.at("text").get_to(m.text);
    m.images = j.value("images", std::vector<ImageAttachment>{});
}

void to_json(nlohmann::json& j, const ChatTranscript& t) {
    j = nlohmann::json{{"stage", t.stage}, {"messages", t.messages}, {"usage", t.usage}, {"retry_log", t.retry_log}};
}

void from_json(const nlohmann::json& j, ChatTranscript& t) {
    j.at("stage").get_to(t.stage);
    j.at("messages").get_to(t.messages);
    t.usage = j.value("usage", nlohmann::json::object());
    t.retry_log = j.value("retry_log", std::vector<std::string>{});
}

std::string message_digest(const std::vector<ChatMessage>& messages) {
    std::uint64_t h = fnv1a64("");
    for (const auto& m : messages) {
        h = fnv1a64(m.role, h);
        h = fnv1a64(std::string_view("\x1f", 1), h);
        h = fnv1a64(m.text, h);
        for (const auto& img : m.images) h = fnv1a64(img.digest, h);
        h = fnv1a64(std::string_view("\x1e", 1), h);
    }
    return hex64(h);
}

void ClientConfig::validate() const {
    if (!(timeout_seconds > 0.0)) throw ConfigError("client timeout must be > 0");
    if (max_retries < 0) throw ConfigError("client retries must be >= 0");
    if (provider != "mock" && provider != "openai") {
        throw ConfigError("unknown client provider '" + provider + "' (expected mock or openai)");
    }
    if (provider == "openai" && base_url.empty()) throw ConfigError("openai client requires a base URL");
}

std::unique_ptr<VlmClient> make_vlm_client(const ClientConfig& config) {
    config.validate();
    if (config.provider == "mock") return std::make_unique<MockVlmClient>(config.model.empty() ? "mock-vlm" : config.model);
    return std::make_unique<OpenAiChatClient>(config);
}

std::unique_ptr<T2iClient> make_t2i_client(const ClientConfig& config) {
    config.validate();
    if (config.provider == "mock") {
        return std::make_unique<MockT2iClient>(1024, 1024, config.model.empty() ? "mock-t2i" : config.model);
    }
    return std::make_unique<OpenAiImageClient>(config);
}

}  // namespace storyscene
