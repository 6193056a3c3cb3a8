// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "storyscene/image.hpp"

namespace storyscene {

/// Axis-aligned pixel rectangle, top-left inclusive, bottom-right exclusive.
struct SceneRegion {
    int x1 = 0;
    int y1 = 0;
    int x2 = 0;
    int y2 = 0;

    int width() const { return x2 - x1; }
    int height() const { return y2 - y1; }
    bool valid_for(std::size_t image_width, std::size_t image_height) const;
    std::array<int, 4> as_array() const { return {x1, y1, x2, y2}; }

    friend bool operator==(const SceneRegion&, const SceneRegion&) = default;
};

inline constexpr int kMinRegionExtent = 64;

/// Clamps each coordinate into the image; an axis left empty or inverted is
/// rebuilt as a kMinRegionExtent span around its clamped midpoint and shifted
/// back inside the image. Idempotent. Image extents must be positive.
SceneRegion snap_region(std::int64_t x1, std::int64_t y1, std::int64_t x2, std::int64_t y2,
                        std::size_t image_width, std::size_t image_height);
SceneRegion snap_region(const std::array<std::int64_t, 4>& raw, std::size_t image_width,
                        std::size_t image_height);

std::vector<Image> crop_regions(const Image& global, const std::vector<SceneRegion>& regions);

double intersection_over_union(const SceneRegion& a, const SceneRegion& b);
double max_pairwise_iou(const std::vector<SceneRegion>& regions);

// Index of the grammatical subject: skip one leading article, take the next token.
std::size_t tag_subject_token(const std::string& sub_prompt);

struct SubPrompt {
    std::string text;
    std::size_t subject_token_index = 0;

    static SubPrompt tagged(std::string text);
    friend bool operator==(const SubPrompt&, const SubPrompt&) = default;
};

struct GlobalImageRef {
    std::string path;  // relative to the project file
    std::size_t width = 0;
    std::size_t height = 0;
    std::string digest;

    friend bool operator==(const GlobalImageRef&, const GlobalImageRef&) = default;
};

struct PlanMetadata {
    std::string vlm_model;
    std::string t2i_model;
    std::string created_at;  // empty in deterministic runs

    friend bool operator==(const PlanMetadata&, const PlanMetadata&) = default;
};

struct StoryPlan {
    std::string theme;
    std::string global_description;
    GlobalImageRef global_image;
    std::vector<SceneRegion> regions;
    std::vector<std::vector<SubPrompt>> sub_prompts;  // [scene][story]
    PlanMetadata metadata;

    std::size_t scene_count() const { return regions.size(); }
    std::size_t story_count() const { return sub_prompts.empty() ? 0 : sub_prompts.front().size(); }

    // Throws InputError unless regions fit the image with positive area, each
    // scene has the same story count, and subject indices are in range.
    void validate() const;

    friend bool operator==(const StoryPlan&, const StoryPlan&) = default;
};

}  // namespace storyscene
