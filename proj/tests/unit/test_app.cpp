// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>

#include <doctest.h>

#include "storyscene/app/commands.hpp"
#include "storyscene/clients/mock_clients.hpp"
#include "storyscene/error.hpp"
#include "storyscene/image.hpp"
#include "storyscene/planner/project_file.hpp"

using namespace storyscene;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("storyscene_unit_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

RunConfig quick_config(const fs::path& out) {
    RunConfig c;
    c.theme = "Snowy dreams and falling stars";
    c.output_dir = out.string();
    c.steps = 6;
    c.t2 = 4;
    c.d_model = 16;
    return c;
}

std::vector<std::uint8_t> bytes_of(const fs::path& p) { return read_file_bytes(p.string()); }

}  // namespace

TEST_CASE("plan with mock clients is byte-stable") {
    const auto a = cmd_plan(quick_config(scratch("plan_a")));
    const auto b = cmd_plan(quick_config(scratch("plan_b")));
    CHECK(read_text_file(a.project_path) == read_text_file(b.project_path));
    const ProjectFile p = load_project(a.project_path);
    CHECK(p.plan.scene_count() == 4);
    CHECK(p.plan.story_count() == 5);
    CHECK(p.plan.metadata.created_at.empty());
    CHECK(p.transcripts.size() >= 2);
}

TEST_CASE("manual layouts are snapped and noted") {
    const fs::path dir = scratch("manual");
    write_file_bytes((dir / "g.png").string(), encode_png(procedural_image(1, 256, 128)));
    write_text_file((dir / "regions.json").string(), R"({
      "theme": "harbour",
      "regions": [[0, 0, 128, 128], [100, 20, 400, 90]],
      "stories": [["A gull circles the mast.", "The fisher mends a net."],
                  ["A seal dozes on the rock.", {"text": "Waves hit the pier.", "subject_token_index": 0}]]
    })");
    RunConfig c = quick_config(dir / "out");
    c.regions_file = (dir / "regions.json").string();
    c.global_image_file = (dir / "g.png").string();
    const auto out = cmd_plan(c);
    REQUIRE(out.warnings.size() == 1);
    CHECK(out.warnings[0].find("snapped") != std::string::npos);
    const ProjectFile p = load_project(out.project_path);
    CHECK(p.plan.regions[1] == SceneRegion{100, 20, 256, 90});
    CHECK(p.plan.sub_prompts[0][1].subject_token_index == 1);
    CHECK(p.plan.theme == "harbour");
    CHECK(p.plan.global_image.width == 256);

    c.stories = 0;
    const auto gen = cmd_generate(out.project_path, c);
    CHECK(gen.all_ok);
    CHECK(gen.image_count() == 4);
}

TEST_CASE("missing API key is a config error before any request") {
    const fs::path dir = scratch("nokey");
    RunConfig c = quick_config(dir);
    c.vlm.provider = "openai";
    c.vlm.base_url = "http://127.0.0.1:1";
    c.vlm.api_key_env = "STORYSCENE_UNSET_KEY_FOR_TEST";
    ::unsetenv("STORYSCENE_UNSET_KEY_FOR_TEST");
    CHECK_THROWS_AS(cmd_plan(c), ConfigError);
    CHECK_FALSE(fs::exists(dir / "project.json"));
}

TEST_CASE("run config validation") {
    RunConfig c;
    CHECK_NOTHROW(c.validate());
    c.t2 = 60;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = RunConfig{};
    c.lambda = -1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = RunConfig{};
    c.heads = 3;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("generate writes images, manifest and memory report") {
    const fs::path dir = scratch("generate");
    RunConfig c = quick_config(dir);
    const auto plan = cmd_plan(c);
    const auto gen = cmd_generate(plan.project_path, c);
    CHECK(gen.all_ok);
    CHECK(gen.image_count() == 20);
    CHECK(fs::exists(dir / "images" / "scene04_story05.png"));
    CHECK(fs::exists(dir / "memory_report.txt"));
    const auto manifest = nlohmann::json::parse(read_text_file(gen.manifest_path));
    CHECK(manifest["schema"] == "storyscene.manifest");
    CHECK(manifest["summary"]["peak_batch"] == 2);
    CHECK(manifest["scenes"][0]["checks"]["pair_participation"] == true);

    RunConfig again = c;
    again.output_dir = (dir / "again").string();
    cmd_generate(plan.project_path, again);
    CHECK(bytes_of(dir / "images" / "scene02_story03.png") == bytes_of(dir / "again" / "images" / "scene02_story03.png"));

    RunConfig other = c;
    other.output_dir = (dir / "other").string();
    other.seed = 43;
    cmd_generate(plan.project_path, other);
    CHECK(bytes_of(dir / "images" / "scene02_story03.png") != bytes_of(dir / "other" / "images" / "scene02_story03.png"));

    RunConfig too_many = c;
    too_many.stories = 6;
    CHECK_THROWS_AS(cmd_generate(plan.project_path, too_many), ConfigError);
}

TEST_CASE("N=1 skips blending and records peak batch 1") {
    const fs::path dir = scratch("n1");
    RunConfig c = quick_config(dir);
    const auto plan = cmd_plan(c);
    c.stories = 1;
    const auto gen = cmd_generate(plan.project_path, c);
    CHECK(gen.all_ok);
    CHECK(gen.image_count() == 4);
    const auto manifest = nlohmann::json::parse(read_text_file(gen.manifest_path));
    CHECK(manifest["summary"]["peak_batch"] == 1);
    CHECK(manifest["summary"]["expected_peak_batch"] == 1);
}

TEST_CASE("parallel scenes give the same bytes") {
    const fs::path dir = scratch("jobs");
    RunConfig c = quick_config(dir);
    c.stories = 3;
    const auto plan = cmd_plan(c);
    cmd_generate(plan.project_path, c);
    RunConfig par = c;
    par.output_dir = (dir / "par").string();
    par.jobs = 4;
    par.pair_workers = 2;
    const auto gen = cmd_generate(plan.project_path, par);
    CHECK(gen.all_ok);
    for (const char* f : {"scene01_story01.png", "scene03_story02.png", "scene04_story03.png"}) {
        CHECK(bytes_of(dir / "images" / f) == bytes_of(dir / "par" / "images" / f));
    }
}

TEST_CASE("judge writes scores") {
    const fs::path dir = scratch("judge");
    RunConfig c = quick_config(dir);
    const auto plan = cmd_plan(c);
    const auto scores = cmd_judge(plan.project_path, c);
    CHECK(scores.theme_adherence > 0.0);
    CHECK(fs::exists(dir / "judge.json"));
}

TEST_CASE("report tabulates manifests and round-trips CSV") {
    CHECK_THROWS_AS(cmd_report({}), InputError);
    CHECK_THROWS_AS(cmd_report({"/nonexistent/manifest.json"}), Error);

    const fs::path dir = scratch("report");
    RunConfig c = quick_config(dir);
    c.scenes = 1;
    const auto plan = cmd_plan(c);
    std::vector<std::string> manifests;
    for (std::size_t n : {1u, 2u, 5u}) {
        RunConfig g = c;
        g.stories = n;
        g.output_dir = (dir / ("n" + std::to_string(n))).string();
        manifests.push_back(cmd_generate(plan.project_path, g).manifest_path);
    }
    const auto rows = collect_report(manifests);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].peak_batch == 1);
    CHECK(rows[1].peak_batch == 2);
    CHECK(rows[2].peak_batch == 2);
    CHECK(parse_report_csv(format_report_csv(rows)) == rows);
    CHECK(cmd_report(manifests, "text").find("peak_batch") != std::string::npos);
    CHECK_THROWS_AS(cmd_report(manifests, "xml"), InputError);

    ReportRow odd{"dir, with \"quotes\"/m.json", 3, true, 2, 2, 0.1 + 0.2, false};
    CHECK(parse_report_csv(format_report_csv({odd})) == std::vector<ReportRow>{odd});
}
