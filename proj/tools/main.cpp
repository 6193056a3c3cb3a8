// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "storyscene/app/commands.hpp"
#include "storyscene/error.hpp"

namespace {

using storyscene::ClientConfig;
using storyscene::RunConfig;

void add_client_options(CLI::App& app, const std::string& prefix, ClientConfig& c) {
    const std::string group = prefix + " client";
    app.add_option("--" + prefix + "-provider", c.provider, "mock or openai")
        ->check(CLI::IsMember({"mock", "openai"}))
        ->group(group);
    app.add_option("--" + prefix + "-base-url", c.base_url)->group(group);
    app.add_option("--" + prefix + "-model", c.model)->group(group);
    app.add_option("--" + prefix + "-api-key-env", c.api_key_env, "name of the env var holding the key")->group(group);
    app.add_option("--" + prefix + "-timeout", c.timeout_seconds, "seconds")->group(group);
    app.add_option("--" + prefix + "-retries", c.max_retries)->group(group);
    app.add_option("--" + prefix + "-temperature", c.temperature)->group(group);
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scene-consistent story image generation"};
    app.set_config("--config", "", "TOML/INI file with any long option as a key");
    app.require_subcommand(1);
    app.fallthrough();

    RunConfig cfg;
    std::string mask_mode = "drop";
    std::string threshold = "mean";

    app.add_option("--theme", cfg.theme, "story theme for planning");
    app.add_option("--regions", cfg.regions_file, "manual layout JSON (skips the VLM)");
    app.add_option("--global-image", cfg.global_image_file, "global scene PNG for a manual layout");
    app.add_option("-M,--scenes", cfg.scenes, "local scenes")->capture_default_str();
    app.add_option("-N,--stories", cfg.stories, "stories per scene")->capture_default_str();
    app.add_option("-T,--steps", cfg.steps, "denoising steps")->capture_default_str();
    app.add_option("--t1", cfg.t1, "blending window start")->capture_default_str();
    app.add_option("--t2", cfg.t2, "blending window end")->capture_default_str();
    app.add_flag("--blending,!--no-blending", cfg.blending, "pairwise noise blending")->capture_default_str();
    app.add_option("--lambda", cfg.lambda, "scene injection weight")->capture_default_str();
    app.add_option("--mask-mode", mask_mode, "zero or drop")->check(CLI::IsMember({"zero", "drop"}))->capture_default_str();
    app.add_flag("--invert-mask", cfg.invert_mask, "share the subject region instead of the background");
    app.add_option("--threshold", threshold, "mask threshold: mean or a number in [0,1]")->capture_default_str();
    app.add_option("--seed", cfg.seed)->capture_default_str();
    app.add_option("--model-seed", cfg.model_seed, "toy denoiser weight seed")->capture_default_str();
    app.add_option("--d-model", cfg.d_model)->capture_default_str();
    app.add_option("--depth", cfg.depth)->capture_default_str();
    app.add_option("--heads", cfg.heads)->capture_default_str();
    app.add_option("-o,--output", cfg.output_dir)->capture_default_str();
    app.add_flag("--deterministic,!--no-deterministic", cfg.deterministic)->capture_default_str();
    app.add_option("-j,--jobs", cfg.jobs, "scenes generated in parallel")->capture_default_str();
    app.add_option("--pair-workers", cfg.pair_workers, "story pairs evaluated in parallel")->capture_default_str();
    add_client_options(app, "vlm", cfg.vlm);
    add_client_options(app, "t2i", cfg.t2i);
    add_client_options(app, "judge", cfg.judge);

    auto* plan = app.add_subcommand("plan", "write project.json and global.png");
    auto* generate = app.add_subcommand("generate", "render every scene of a project");
    std::string project;
    generate->add_option("project", project, "project.json")->required()->check(CLI::ExistingFile);
    auto* run = app.add_subcommand("run", "plan, then generate");
    auto* judge = app.add_subcommand("judge", "score a plan with a VLM judge");
    judge->add_option("project", project, "project.json")->required()->check(CLI::ExistingFile);
    auto* report = app.add_subcommand("report", "tabulate manifests");
    std::vector<std::string> manifests;
    std::string format = "text";
    report->add_option("manifests", manifests, "manifest.json files")->required();
    report->add_option("--format", format)->check(CLI::IsMember({"text", "csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    cfg.mask_mode = mask_mode == "zero" ? storyscene::KvMaskMode::zero : storyscene::KvMaskMode::drop;
    if (threshold == "mean") {
        cfg.threshold = storyscene::ThresholdPolicy::mean();
    } else {
        try {
            cfg.threshold = storyscene::ThresholdPolicy::fixed(std::stod(threshold));
        } catch (const std::exception&) {
            std::cerr << "error: --threshold must be 'mean' or a number\n";
            return 2;
        }
    }

    try {
        if (plan->parsed()) {
            const auto out = storyscene::cmd_plan(cfg);
            print_warnings(out.warnings);
            std::cout << out.project_path << "\n";
            return 0;
        }
        if (generate->parsed() || run->parsed()) {
            const auto out = generate->parsed() ? storyscene::cmd_generate(project, cfg) : storyscene::cmd_run(cfg);
            for (const auto& s : out.scenes) {
                if (!s.error.empty()) std::cerr << "scene " << s.index << " failed: " << s.error << "\n";
            }
            std::cout << out.manifest_path << " (" << out.image_count() << " images)\n";
            return out.all_ok ? 0 : 1;
        }
        if (judge->parsed()) {
            const auto scores = storyscene::cmd_judge(project, cfg);
            print_warnings(scores.warnings);
            std::printf("narrative_coherence %.3f\ntheme_adherence %.3f\nlayout_reasonableness %.3f\n",
                        scores.narrative_coherence, scores.theme_adherence, scores.layout_reasonableness);
            return 0;
        }
        if (report->parsed()) {
            std::cout << storyscene::cmd_report(manifests, format);
            return 0;
        }
    } catch (const storyscene::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const storyscene::InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const storyscene::PlanningError& e) {
        std::cerr << "planning error (" << e.stage() << "): " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
