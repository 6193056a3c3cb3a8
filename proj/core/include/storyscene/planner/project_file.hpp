// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "storyscene/clients/client.hpp"
#include "storyscene/planner/story_plan.hpp"

namespace storyscene {

inline constexpr int kProjectSchemaVersion = 1;
inline constexpr const char* kProjectSchemaName = "storyscene.project";

/// One theme: the plan, every client transcript, seeds and warnings.
struct ProjectFile {
    StoryPlan plan;
    std::vector<ChatTranscript> transcripts;
    nlohmann::json seeds = nlohmann::json::object();
    std::vector<std::string> warnings;

    friend bool operator==(const ProjectFile&, const ProjectFile&) = default;
};

void to_json(nlohmann::json& j, const SceneRegion& r);
void from_json(const nlohmann::json& j, SceneRegion& r);
void to_json(nlohmann::json& j, const SubPrompt& p);
void from_json(const nlohmann::json& j, SubPrompt& p);
void to_json(nlohmann::json& j, const StoryPlan& p);
void from_json(const nlohmann::json& j, StoryPlan& p);

nlohmann::json project_to_json(const ProjectFile& project);
// Rejects documents whose schema name or version is not recognised.
ProjectFile project_from_json(const nlohmann::json& doc);

std::string serialize_project(const ProjectFile& project);
void save_project(const std::string& path, const ProjectFile& project);
ProjectFile load_project(const std::string& path);

}  // namespace storyscene
