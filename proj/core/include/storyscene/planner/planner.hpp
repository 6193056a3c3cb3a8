// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "storyscene/clients/client.hpp"
#include "storyscene/image.hpp"
#include "storyscene/planner/story_plan.hpp"

namespace storyscene {

inline constexpr std::size_t kDescriptionWordLimit = 50;
inline constexpr std::size_t kGlobalImageSize = 1024;

struct ConceptualizeResult {
    std::string description;
    std::vector<ChatTranscript> transcripts;
    std::vector<std::string> warnings;
};

/// Asks the VLM for a global scene description of at most 50 words,
/// re-prompting once and then truncating if the reply runs long.
ConceptualizeResult conceptualize(const std::string& theme, VlmClient& vlm);

struct VisualizeResult {
    Image image;
    std::vector<std::uint8_t> png;
    std::vector<std::string> warnings;
};

/// Renders the description with the T2I client; the result is always
/// 1024×1024 (other sizes are resized and noted in warnings).
VisualizeResult visualize(const std::string& description, T2iClient& t2i);

struct CraftResult {
    std::vector<SceneRegion> regions;
    std::vector<std::vector<SubPrompt>> sub_prompts;
    std::vector<ChatTranscript> transcripts;
    std::vector<std::string> warnings;
};

/// Parses a story-director reply: M coordinate quadruples, each followed by
/// stories numbered 1..N. Regions are snapped to the image. Throws
/// ParseError on too few regions or stories.
CraftResult parse_craft_reply(const std::string& reply, std::size_t scene_count, std::size_t story_count,
                              std::size_t image_width, std::size_t image_height);

CraftResult craft(const Image& global_image, const std::vector<std::uint8_t>& global_png,
                  const std::string& theme, VlmClient& vlm, std::size_t scene_count = 4,
                  std::size_t story_count = 5);

struct JudgeScores {
    double narrative_coherence = 0.0;
    double theme_adherence = 0.0;
    double layout_reasonableness = 0.0;
    std::vector<std::string> warnings;
    std::vector<ChatTranscript> transcripts;
};

// Percent scores in reply order (labelled lines preferred), normalized to [0, 1].
JudgeScores parse_judge_reply(const std::string& reply);

JudgeScores judge_plan(const StoryPlan& plan, VlmClient& judge);

// Reference points shipped for offline tests: the conceptualize and craft
// exemplar replies for the theme "Snowy dreams and falling stars".
inline constexpr const char* kExemplarTheme = "Snowy dreams and falling stars";
std::string exemplar_conceptualize_reply();
std::string exemplar_craft_reply();

// Twelve offline themes used by tests and the CLI's corpus mode.
const std::vector<std::string>& offline_theme_corpus();

}  // namespace storyscene
