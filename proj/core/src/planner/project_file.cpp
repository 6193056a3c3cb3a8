// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#include "storyscene/planner/project_file.hpp"

#include "storyscene/error.hpp"
#include "storyscene/image.hpp"
#include "storyscene/planner/story_plan.hpp"

namespace storyscene {

void to_json(nlohmann::json& j, const SceneRegion& r) { j = nlohmann::json::array({r.x1, r.y1, r.x2, r.y2}); }

void from_json(const nlohmann::json& j, SceneRegion& r) {
    if (!j.is_array() || j.size() != 4) throw InputError("region must be an array of four integers");
    r = {j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
}

void to_json(nlohmann::json& j, const SubPrompt& p) {
    j = nlohmann::json{{"text", p.text}, {"subject_token_index", p.subject_token_index}};
}

void from_json(const nlohmann::json& j, SubPrompt& p) {
    if (j.is_string()) {
        p = SubPrompt::tagged(j.get<std::string>());
        return;
    }
    j.at("text").get_to(p.text);
    p.subject_token_index = j.contains("subject_token_index") ? j.at("subject_token_index").get<std::size_t>()
                                                              : tag_subject_token(p.text);
}

void to_json(nlohmann::json& j, const StoryPlan& p) {
    j = nlohmann::json{
        {"theme", p.theme},
        {"global_description", p.global_description},
        {"global_image",
         {{"path", p.global_image.path},
          {"width", p.global_image.width},
          {"height", p.global_image.height},
          {"digest", p.global_image.digest}}},
        {"regions", p.regions},
        {"sub_prompts", p.sub_prompts},
        {"metadata",
         {{"vlm_model", p.metadata.vlm_model},
          {"t2i_model", p.metadata.t2i_model},
          {"created_at", p.metadata.created_at}}},
    };
}

void from_json(const nlohmann::json& j, StoryPlan& p) {
    j.at("theme").get_to(p.theme);
    p.global_description = j.value("global_description", "");
    const auto& img = j.at("global_image");
    p.global_image.path = img.at("path").get<std::string>();
    p.global_image.width = img.at("width").get<std::size_t>();
    p.global_image.height = img.at("height").get<std::size_t>();
    p.global_image.digest = img.value("digest", "");
    j.at("regions").get_to(p.regions);
    j.at("sub_prompts").get_to(p.sub_prompts);
    const auto meta = j.value("metadata", nlohmann::json::object());
    p.metadata.vlm_model = meta.value("vlm_model", "");
    p.metadata.t2i_model = meta.value("t2i_model", "");
    p.metadata.created_at = meta.value("created_at", "");
}

nlohmann::json project_to_json(const ProjectFile& project) {
    return {
        {"schema", kProjectSchemaName},
        {"schema_version", kProjectSchemaVersion},
        {"plan", project.plan},
        {"statistics", {{"max_pairwise_iou", max_pairwise_iou(project.plan.regions)}}},
        {"transcripts", project.transcripts},
        {"seeds", project.seeds},
        {"warnings", project.warnings},
    };
}

ProjectFile project_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || doc.value("schema", "") != kProjectSchemaName) {
        throw InputError("not a storyscene project file");
    }
    const int version = doc.value("schema_version", -1);
    if (version != kProjectSchemaVersion) {
        throw InputError("unsupported project schema version " + std::to_string(version) + " (expected " +
                         std::to_string(kProjectSchemaVersion) + ")");
    }
    ProjectFile project;
    try {
        doc.at("plan").get_to(project.plan);
        project.transcripts = doc.value("transcripts", std::vector<ChatTranscript>{});
        project.seeds = doc.value("seeds", nlohmann::json::object());
        project.warnings = doc.value("warnings", std::vector<std::string>{});
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed project file: ") + e.what());
    }
    project.plan.validate();
    return project;
}

std::string serialize_project(const ProjectFile& project) { return project_to_json(project).dump(2) + "\n"; }

void save_project(const std::string& path, const ProjectFile& project) {
    write_text_file(path, serialize_project(project));
}

ProjectFile load_project(const std::string& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw InputError("cannot parse project file " + path + ": " + e.what());
    }
    return project_from_json(doc);
}

}  // namespace storyscene
