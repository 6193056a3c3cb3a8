// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "storyscene/clients/client.hpp"

namespace storyscene {

/// Offline VLM. Reply resolution order: queued script, fixtures keyed by
/// message digest, then a seeded synthetic reply chosen from the system
/// prompt (scene planner, story director, plan reviewer).
class MockVlmClient final : public VlmClient {
public:
    explicit MockVlmClient(std::string model = "mock-vlm") : model_(std::move(model)) {}

    void add_fixture(const std::vector<ChatMessage>& messages, std::string reply);
    void queue_reply(std::string reply);

    ChatResult chat(const std::vector<ChatMessage>& messages) override;
    std::string model_id() const override { return model_; }

    std::size_t call_count() const;

private:
    std::string synthesize(const std::vector<ChatMessage>& messages) const;

    std::string model_;
    mutable std::mutex mutex_;
    std::deque<std::string> script_;
    std::map<std::string, std::string> fixtures_;
    std::size_t calls_ = 0;
};

/// Offline T2I: a procedural image seeded by the prompt hash.
class MockT2iClient final : public T2iClient {
public:
    explicit MockT2iClient(std::size_t width = 1024, std::size_t height = 1024, std::string model = "mock-t2i")
        : width_(width), height_(height), model_(std::move(model)) {}

    ImageResult generate_image(const std::string& prompt) override;
    std::string model_id() const override { return model_; }

private:
    std::size_t width_;
    std::size_t height_;
    std::string model_;
};

}  // namespace storyscene
