// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "storyscene/attention/attention.hpp"
#include "storyscene/clients/client.hpp"
#include "storyscene/planner/planner.hpp"
#include "storyscene/scheduler/sampler.hpp"

namespace storyscene {

struct RunConfig {
    // Planning inputs: a theme, or a global image plus a manual regions file.
    std::string theme;
    std::string regions_file;
    std::string global_image_file;
    std::string project_file;

    std::size_t scenes = 4;   // M
    std::size_t stories = 5;  // N; for generate, 0 means "all stories in the project"
    int steps = 50;           // T
    int t1 = 0;
    int t2 = 25;
    bool blending = true;

    double lambda = 0.5;
    KvMaskMode mask_mode = KvMaskMode::drop;
    bool invert_mask = false;
    ThresholdPolicy threshold = ThresholdPolicy::mean();

    std::uint64_t seed = 42;
    std::uint64_t model_seed = 0;
    std::size_t d_model = 32;
    std::size_t depth = 1;
    std::size_t heads = 1;

    std::string output_dir = "storyscene_out";
    bool deterministic = true;
    std::size_t jobs = 1;
    std::size_t pair_workers = 1;

    ClientConfig vlm;
    ClientConfig t2i;
    ClientConfig judge;

    // Mirrors BlendingConfig's invariants; throws ConfigError.
    void validate() const;
    BlendingConfig blending_config(std::size_t n) const;
};

struct PlanOutcome {
    std::string project_path;
    std::vector<std::string> warnings;
};

/// Plans one theme (or a manual layout) and writes project.json plus
/// global.png into cfg.output_dir. Client configs are validated, and live
/// clients constructed, before any request is made.
PlanOutcome cmd_plan(const RunConfig& cfg);

// Overload with injected clients (tests, embedding).
PlanOutcome cmd_plan(const RunConfig& cfg, VlmClient& vlm, T2iClient& t2i);

struct SceneOutcome {
    std::size_t index = 0;
    bool ok = false;
    std::string error;
    std::vector<std::string> images;
};

struct GenerateOutcome {
    std::string manifest_path;
    std::vector<SceneOutcome> scenes;
    bool all_ok = false;
    std::size_t image_count() const;
};

/// Runs the sampler for every local scene in the project and writes
/// images/, manifest.json and memory_report.txt into cfg.output_dir.
/// A failing scene is recorded and the remaining scenes still run.
GenerateOutcome cmd_generate(const std::string& project_path, const RunConfig& cfg);

GenerateOutcome cmd_run(const RunConfig& cfg);

JudgeScores cmd_judge(const std::string& project_path, const RunConfig& cfg);
JudgeScores cmd_judge(const std::string& project_path, const RunConfig& cfg, VlmClient& judge);

struct ReportRow {
    std::string manifest;
    std::size_t n = 0;
    bool blending = false;
    std::size_t peak_batch = 0;
    std::size_t expected_peak_batch = 0;
    double wall_seconds = 0.0;
    bool all_ok = false;

    friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

std::vector<ReportRow> collect_report(const std::vector<std::string>& manifest_paths);
std::string format_report_text(const std::vector<ReportRow>& rows);
std::string format_report_csv(const std::vector<ReportRow>& rows);
std::vector<ReportRow> parse_report_csv(const std::string& csv);

// Throws InputError on an empty list or an unreadable manifest.
std::string cmd_report(const std::vector<std::string>& manifest_paths, const std::string& format = "text");

}  // namespace storyscene
