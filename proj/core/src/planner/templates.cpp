// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#include "storyscene/planner/templates.hpp"

#include <set>

#include "storyscene/error.hpp"
#include "storyscene/planner/story_plan.hpp"

namespace storyscene {

namespace assets {
extern const std::string_view kConceptualizeTemplate;
extern const std::string_view kCraftTemplate;
extern const std::string_view kJudgeTemplate;
}  // namespace assets

namespace {

// Asset files end with a newline; rendered prompts do not.
std::string_view strip_final_newline(std::string_view s) {
    if (!s.empty() && s.back() == '\n') s.remove_suffix(1);
    return s;
}

}  // namespace

std::string_view conceptualize_template() { return strip_final_newline(assets::kConceptualizeTemplate); }
std::string_view craft_template() { return strip_final_newline(assets::kCraftTemplate); }
std::string_view judge_template() { return strip_final_newline(assets::kJudgeTemplate); }

std::string render_template(std::string_view tpl, const std::map<std::string, std::string>& slots) {
    std::string out;
    out.reserve(tpl.size());
    std::set<std::string> used;
    std::size_t i = 0;
    while (i < tpl.size()) {
        if (tpl[i] == '{') {
            const std::size_t close = tpl.find('}', i + 1);
            if (close != std::string_view::npos) {
                const std::string name(tpl.substr(i + 1, close - i - 1));
                if (auto it = slots.find(name); it != slots.end()) {
                    out += it->second;
                    used.insert(name);
                    i = close + 1;
                    continue;
                }
            }
        }
        out += tpl[i++];
    }
    for (const auto& [name, value] : slots) {
        if (!used.count(name)) throw InputError("template has no slot {" + name + "}");
    }
    return out;
}

std::string render_conceptualize(const std::string& theme) {
    return render_template(conceptualize_template(), {{"User Prompt", theme}});
}

std::string render_craft(const std::string& theme, std::size_t image_width, std::size_t image_height,
                         std::size_t scene_count, std::size_t story_count) {
    return render_template(craft_template(), {{"theme", theme},
                                              {"image_width", std::to_string(image_width)},
                                              {"image_height", std::to_string(image_height)},
                                              {"scene_count", std::to_string(scene_count)},
                                              {"story_count", std::to_string(story_count)},
                                              {"total_stories", std::to_string(scene_count * story_count)}});
}

std::string render_judge(const StoryPlan& plan) {
    std::string scenes;
    for (std::size_t s = 0; s < plan.regions.size(); ++s) {
        const auto& r = plan.regions[s];
        scenes += "Scene " + std::to_string(s + 1) + " [" + std::to_string(r.x1) + ", " + std::to_string(r.y1) +
                  ", " + std::to_string(r.x2) + ", " + std::to_string(r.y2) + "]:\n";
        for (std::size_t k = 0; k < plan.sub_prompts[s].size(); ++k) {
            scenes += "  " + std::to_string(k + 1) + ". " + plan.sub_prompts[s][k].text + "\n";
        }
    }
    if (!scenes.empty()) scenes.pop_back();
    return render_template(judge_template(), {{"theme", plan.theme},
                                              {"description", plan.global_description},
                                              {"image_width", std::to_string(plan.global_image.width)},
                                              {"image_height", std::to_string(plan.global_image.height)},
                                              {"scenes", scenes}});
}

}  // namespace storyscene
