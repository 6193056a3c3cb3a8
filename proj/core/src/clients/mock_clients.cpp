// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#include "storyscene/clients/mock_clients.hpp"

#include <algorithm>
#include <cmath>
#include <regex>

#include "storyscene/error.hpp"
#include "storyscene/hash.hpp"
#include "storyscene/image.hpp"

namespace storyscene {

namespace {

const char* const kSceneDescriptions[] = {
    "A quiet harbor town at dusk, lanterns glowing along wet cobblestone streets, wooden boats rocking "
    "beside a stone pier, gulls circling a lighthouse on the headland, and soft fog rolling in from the sea.",
    "A vast alpine meadow under a starry sky, scattered pines, a frozen lake mirroring the aurora, "
    "snow-dusted boulders, and a winding trail leading toward distant moonlit peaks.",
    "An overgrown botanical greenhouse with arched glass panes, hanging vines, stone fountains, "
    "rows of exotic flowers, and warm afternoon light spilling across mossy tiles.",
    "A sprawling desert canyon at sunrise, layered red cliffs, a dry riverbed of pale stones, "
    "sparse cacti, and long violet shadows stretching over rippled sand dunes.",
    "A cozy autumn village square, timber houses with crooked roofs, a cobbled well, "
    "fallen orange leaves, market stalls under striped awnings, and hills fading into mist.",
    "A moonlit bamboo forest beside a narrow river, stepping stones, paper lanterns on low branches, "
    "a small arched bridge, and fireflies drifting above tall reeds.",
};

const char* const kProtagonists[] = {"fox", "girl", "owl", "rabbit", "deer", "man",
                                     "cat", "boy", "bear", "woman", "squirrel", "sailor"};
const char* const kActions[] = {
    "explores the path, sniffing flowers under the moonlight.",
    "dances among the trees, feeling the magic of the night.",
    "perches quietly, watching over the serene landscape.",
    "hops through the grass, seeking shelter for the night.",
    "rests by the water, listening to the gentle breeze.",
    "gathers fallen leaves, building a tiny secret den.",
    "follows a trail of glowing fireflies toward the hills.",
    "paints the view, capturing the fading evening colors.",
    "reads an old letter, smiling at forgotten memories.",
    "chases its shadow across the open clearing.",
};

template <std::size_t K>
const char* pick(const char* const (&arr)[K], std::uint64_t h) {
    return arr[h % K];
}

int capture_int(const std::string& text, const std::regex& re, int fallback) {
    std::smatch m;
    return std::regex_search(text, m, re) ? std::stoi(m[1].str()) : fallback;
}

std::string synth_craft(const std::string& system, std::uint64_t seed) {
    static const std::regex size_re(R"((\d+)x(\d+) image)");
    static const std::regex scenes_re(R"(Select (\d+) distinct)");
    static const std::regex stories_re(R"(Create (\d+) unique stories)");
    std::smatch m;
    int width = 1024, height = 1024;
    if (std::regex_search(system, m, size_re)) {
        width = std::stoi(m[1].str());
        height = std::stoi(m[2].str());
    }
    const int scenes = std::max(1, capture_int(system, scenes_re, 4));
    const int stories = std::max(1, capture_int(system, stories_re, 5));

    const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(scenes))));
    const int rows = (scenes + cols - 1) / cols;
    const int cw = width / cols, ch = height / rows;
    std::string out;
    for (int s = 0; s < scenes; ++s) {
        const std::uint64_t hs = derive_seed(seed, static_cast<std::uint64_t>(s) + 1);
        const int cx = s % cols, cy = s / cols;
        const int inset_x = static_cast<int>(hs % 17), inset_y = static_cast<int>((hs >> 8) % 17);
        out += "Sub-scene " + std::to_string(s + 1) + ": [" + std::to_string(cx * cw + inset_x) + ", " +
               std::to_string(cy * ch + inset_y) + ", " + std::to_string((cx + 1) * cw - inset_y) + ", " +
               std::to_string((cy + 1) * ch - inset_x) + "]\n";
        for (int k = 0; k < stories; ++k) {
            const std::uint64_t hk = derive_seed(hs, static_cast<std::uint64_t>(k) + 1);
            const std::string who = pick(kProtagonists, hk);
            const char* article = std::string("aeiou").find(who[0]) != std::string::npos ? "An" : "A";
            out += std::to_string(k + 1) + ". " + article + " " + who + " " + pick(kActions, hk >> 16) + "\n";
        }
    }
    return out;
}

std::string synth_judge(std::uint64_t seed) {
    auto score = [&](std::uint64_t salt) { return std::to_string(70 + 10 * (derive_seed(seed, salt) % 4)); };
    return "Narrative Coherence: " + score(1) + "%\nTheme Adherence: " + score(2) +
           "%\nLayout Reasonableness: " + score(3) + "%";
}

}  // namespace

void MockVlmClient::add_fixture(const std::vector<ChatMessage>& messages, std::string reply) {
    std::lock_guard lock(mutex_);
    fixtures_[message_digest(messages)] = std::move(reply);
}

void MockVlmClient::queue_reply(std::string reply) {
    std::lock_guard lock(mutex_);
    script_.push_back(std::move(reply));
}

std::size_t MockVlmClient::call_count() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

ChatResult MockVlmClient::chat(const std::vector<ChatMessage>& messages) {
    if (messages.empty()) throw InputError("chat: no messages");
    std::string reply;
    {
        std::lock_guard lock(mutex_);
        ++calls_;
        if (!script_.empty()) {
            reply = std::move(script_.front());
            script_.pop_front();
        } else if (auto it = fixtures_.find(message_digest(messages)); it != fixtures_.end()) {
            reply = it->second;
        } else {
            reply = synthesize(messages);
        }
    }
    ChatResult result;
    result.text = reply;
    result.transcript.messages = messages;
    result.transcript.messages.push_back({"assistant", reply, {}});
    return result;
}

std::string MockVlmClient::synthesize(const std::vector<ChatMessage>& messages) const {
    const std::string& system = messages.front().text;
    const std::uint64_t seed = fnv1a64(message_digest(messages));
    if (system.find("You are now a scene planner") != std::string::npos) {
        return pick(kSceneDescriptions, seed);
    }
    if (system.find("Now you are a story director") != std::string::npos) return synth_craft(system, seed);
    if (system.find("Narrative Coherence") != std::string::npos) return synth_judge(seed);
    return "OK";
}

ImageResult MockT2iClient::generate_image(const std::string& prompt) {
    if (prompt.empty()) throw InputError("generate_image: empty prompt");
    return {encode_png(procedural_image(fnv1a64(prompt), width_, height_)), {}};
}

}  // namespace storyscene
