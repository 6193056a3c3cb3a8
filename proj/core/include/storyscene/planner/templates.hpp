// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>

namespace storyscene {

struct StoryPlan;

// Raw template assets with their named {slot} placeholders.
std::string_view conceptualize_template();
std::string_view craft_template();
std::string_view judge_template();

/// Replaces every {name} whose name is a key of `slots`; other braces are
/// left untouched. Throws InputError if a supplied slot never occurs.
std::string render_template(std::string_view tpl, const std::map<std::string, std::string>& slots);

std::string render_conceptualize(const std::string& theme);
std::string render_craft(const std::string& theme, std::size_t image_width, std::size_t image_height,
                         std::size_t scene_count, std::size_t story_count);
std::string render_judge(const StoryPlan& plan);

}  // namespace storyscene
