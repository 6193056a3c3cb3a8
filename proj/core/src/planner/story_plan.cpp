// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#include "storyscene/planner/story_plan.hpp"

#include <algorithm>

#include "storyscene/error.hpp"
#include "storyscene/text.hpp"

namespace storyscene {

bool SceneRegion::valid_for(std::size_t image_width, std::size_t image_height) const {
    return x1 >= 0 && y1 >= 0 && x1 < x2 && y1 < y2 && static_cast<std::size_t>(x2) <= image_width &&
           static_cast<std::size_t>(y2) <= image_height;
}

namespace {

std::pair<std::int64_t, std::int64_t> snap_axis(std::int64_t lo, std::int64_t hi, std::int64_t extent) {
    lo = std::clamp<std::int64_t>(lo, 0, extent);
    hi = std::clamp<std::int64_t>(hi, 0, extent);
    if (lo < hi) return {lo, hi};
    const std::int64_t span = std::min<std::int64_t>(kMinRegionExtent, extent);
    const std::int64_t mid = lo + (hi - lo) / 2;
    const std::int64_t start = std::clamp<std::int64_t>(mid - span / 2, 0, extent - span);
    return {start, start + span};
}

}  // namespace

SceneRegion snap_region(std::int64_t x1, std::int64_t y1, std::int64_t x2, std::int64_t y2,
                        std::size_t image_width, std::size_t image_height) {
    if (image_width == 0 || image_height == 0 || image_width > (1u << 30) || image_height > (1u << 30)) {
        throw InputError("snap_region: image extents must be positive");
    }
    const auto [ax, bx] = snap_axis(x1, x2, static_cast<std::int64_t>(image_width));
    const auto [ay, by] = snap_axis(y1, y2, static_cast<std::int64_t>(image_height));
    return {static_cast<int>(ax), static_cast<int>(ay), static_cast<int>(bx), static_cast<int>(by)};
}

SceneRegion snap_region(const std::array<std::int64_t, 4>& raw, std::size_t image_width,
                        std::size_t image_height) {
    return snap_region(raw[0], raw[1], raw[2], raw[3], image_width, image_height);
}

std::vector<Image> crop_regions(const Image& global, const std::vector<SceneRegion>& regions) {
    std::vector<Image> out;
    out.reserve(regions.size());
    for (const auto& r : regions) {
        if (!r.valid_for(global.width, global.height)) throw InternalError("crop: region outside the image");
        out.push_back(crop_image(global, static_cast<std::size_t>(r.x1), static_cast<std::size_t>(r.y1),
                                 static_cast<std::size_t>(r.x2), static_cast<std::size_t>(r.y2)));
    }
    return out;
}

double intersection_over_union(const SceneRegion& a, const SceneRegion& b) {
    const double iw = std::max(0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
    const double ih = std::max(0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
    const double inter = iw * ih;
    const double uni = static_cast<double>(a.width()) * a.height() + static_cast<double>(b.width()) * b.height() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

double max_pairwise_iou(const std::vector<SceneRegion>& regions) {
    double best = 0.0;
    for (std::size_t i = 0; i < regions.size(); ++i)
        for (std::size_t j = i + 1; j < regions.size(); ++j)
            best = std::max(best, intersection_over_union(regions[i], regions[j]));
    return best;
}

std::size_t tag_subject_token(const std::string& sub_prompt) {
    const auto words = split_words(sub_prompt);
    if (words.size() >= 2) {
        const std::string first = normalize_token(words[0]);
        if (first == "a" || first == "an" || first == "the") return 1;
    }
    return 0;
}

SubPrompt SubPrompt::tagged(std::string text) {
    const std::size_t idx = tag_subject_token(text);
    return {std::move(text), idx};
}

void StoryPlan::validate() const {
    if (regions.empty()) throw InputError("plan has no scenes");
    if (sub_prompts.size() != regions.size()) throw InputError("plan needs one story list per scene");
    const std::size_t n = sub_prompts.front().size();
    if (n == 0) throw InputError("plan scenes have no stories");
    for (std::size_t s = 0; s < regions.size(); ++s) {
        if (!regions[s].valid_for(global_image.width, global_image.height)) {
            throw InputError("scene " + std::to_string(s + 1) + " region lies outside the global image");
        }
        if (sub_prompts[s].size() != n) throw InputError("every scene must have the same number of stories");
        for (const auto& p : sub_prompts[s]) {
            if (p.text.empty()) throw InputError("empty story sub-prompt");
            if (p.subject_token_index >= word_count(p.text)) {
                throw InputError("subject token index out of range for \"" + p.text + "\"");
            }
        }
    }
}

}  // namespace storyscene
