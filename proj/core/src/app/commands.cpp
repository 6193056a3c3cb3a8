// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#include "storyscene/app/commands.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <future>
#include <iomanip>
#include <sstream>

#include "storyscene/denoiser/toy_denoiser.hpp"
#include "storyscene/error.hpp"
#include "storyscene/hash.hpp"
#include "storyscene/planner/project_file.hpp"
#include "storyscene/planner/templates.hpp"
#include "storyscene/text.hpp"

namespace fs = std::filesystem;

namespace storyscene {

void RunConfig::validate() const {
    if (scenes < 1) throw ConfigError("scene count M must be >= 1");
    if (steps < 1 || steps > 1000) throw ConfigError("steps T must be in [1, 1000]");
    if (!(0 <= t1 && t1 <= t2 && t2 <= steps)) {
        throw ConfigError("blending window must satisfy 0 <= T1 <= T2 <= T");
    }
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
    if (d_model == 0 || heads == 0 || d_model % heads != 0 || depth == 0) {
        throw ConfigError("d_model must be a positive multiple of heads; depth >= 1");
    }
    if (output_dir.empty()) throw ConfigError("output directory must be set");
}

BlendingConfig RunConfig::blending_config(std::size_t n) const {
    BlendingConfig b{t1, t2, n, steps, blending};
    b.validate();
    return b;
}

namespace {

std::string utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string two_digits(std::size_t v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02zu", v);
    return buf;
}

void append(std::vector<std::string>& dst, const std::vector<std::string>& src) {
    dst.insert(dst.end(), src.begin(), src.end());
}

void append(std::vector<ChatTranscript>& dst, const std::vector<ChatTranscript>& src) {
    dst.insert(dst.end(), src.begin(), src.end());
}

ProjectFile plan_manual(const RunConfig& cfg) {
    if (cfg.global_image_file.empty()) throw ConfigError("manual planning needs --global-image");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(cfg.regions_file));
    } catch (const nlohmann::json::exception& e) {
        throw InputError("cannot parse regions file: " + std::string(e.what()));
    }
    const Image global = decode_png(read_file_bytes(cfg.global_image_file));

    ProjectFile project;
    StoryPlan& plan = project.plan;
    plan.theme = doc.value("theme", cfg.theme);
    plan.global_description = doc.value("description", "");
    try {
        const auto& regions = doc.at("regions");
        const auto& stories = doc.at("stories");
        if (regions.size() != stories.size()) throw InputError("regions file: need one story list per region");
        for (std::size_t s = 0; s < regions.size(); ++s) {
            const auto raw = regions[s].get<std::array<std::int64_t, 4>>();
            const SceneRegion snapped = snap_region(raw, global.width, global.height);
            if (snapped.x1 != raw[0] || snapped.y1 != raw[1] || snapped.x2 != raw[2] || snapped.y2 != raw[3]) {
                project.warnings.push_back("manual region " + std::to_string(s + 1) + " [" +
                                           std::to_string(raw[0]) + ", " + std::to_string(raw[1]) + ", " +
                                           std::to_string(raw[2]) + ", " + std::to_string(raw[3]) +
                                           "] snapped to [" + std::to_string(snapped.x1) + ", " +
                                           std::to_string(snapped.y1) + ", " + std::to_string(snapped.x2) + ", " +
                                           std::to_string(snapped.y2) + "]");
            }
            plan.regions.push_back(snapped);
            plan.sub_prompts.push_back(stories[s].get<std::vector<SubPrompt>>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed regions file: ") + e.what());
    }
    const auto png = encode_png(global);
    plan.global_image = {"global.png", global.width, global.height, hex64(fnv1a64(png))};
    plan.metadata = {"manual", "manual", cfg.deterministic ? "" : utc_now()};
    fs::create_directories(cfg.output_dir);
    write_file_bytes((fs::path(cfg.output_dir) / "global.png").string(), png);
    return project;
}

}  // namespace

PlanOutcome cmd_plan(const RunConfig& cfg) {
    cfg.validate();
    if (!cfg.regions_file.empty()) {
        ProjectFile project = plan_manual(cfg);
        project.plan.validate();
        const std::string path = (fs::path(cfg.output_dir) / "project.json").string();
        save_project(path, project);
        return {path, project.warnings};
    }
    // Both clients exist (and have checked their API keys) before any request.
    auto vlm = make_vlm_client(cfg.vlm);
    auto t2i = make_t2i_client(cfg.t2i);
    return cmd_plan(cfg, *vlm, *t2i);
}

PlanOutcome cmd_plan(const RunConfig& cfg, VlmClient& vlm, T2iClient& t2i) {
    cfg.validate();
    if (trim(cfg.theme).empty()) throw ConfigError("plan needs a theme (or a regions file)");

    ProjectFile project;
    StoryPlan& plan = project.plan;
    plan.theme = cfg.theme;

    ConceptualizeResult concepts = conceptualize(cfg.theme, vlm);
    plan.global_description = concepts.description;
    append(project.transcripts, concepts.transcripts);
    append(project.warnings, concepts.warnings);

    VisualizeResult visual = visualize(plan.global_description, t2i);
    append(project.warnings, visual.warnings);

    CraftResult crafted = craft(visual.image, visual.png, cfg.theme, vlm, cfg.scenes, cfg.stories);
    plan.regions = crafted.regions;
    plan.sub_prompts = crafted.sub_prompts;
    append(project.transcripts, crafted.transcripts);
    append(project.warnings, crafted.warnings);

    plan.global_image = {"global.png", visual.image.width, visual.image.height, hex64(fnv1a64(visual.png))};
    plan.metadata = {vlm.model_id(), t2i.model_id(), cfg.deterministic ? "" : utc_now()};
    project.seeds = {{"t2i_prompt_hash", hex64(fnv1a64(plan.global_description))}, {"generation", cfg.seed}};
    plan.validate();

    fs::create_directories(cfg.output_dir);
    write_file_bytes((fs::path(cfg.output_dir) / "global.png").string(), visual.png);
    const std::string path = (fs::path(cfg.output_dir) / "project.json").string();
    save_project(path, project);
    return {path, project.warnings};
}

std::size_t GenerateOutcome::image_count() const {
    std::size_t n = 0;
    for (const auto& s : scenes) n += s.images.size();
    return n;
}

namespace {

struct SceneJob {
    SceneOutcome outcome;
    nlohmann::json record;
};

SceneJob run_scene(const StoryPlan& plan, const Image& global, std::size_t scene, std::size_t n,
                   const RunConfig& cfg, const NoiseSchedule& schedule, const fs::path& image_dir) {
    SceneJob job;
    job.outcome.index = scene + 1;
    const std::uint64_t scene_seed = derive_seed(cfg.seed, scene + 1);
    const BlendingConfig bcfg = cfg.blending_config(n);
    job.record = {{"index", scene + 1},
                  {"region", plan.regions[scene]},
                  {"seed", scene_seed},
                  {"n", n},
                  {"expected_peak_batch", peak_denoiser_batch(bcfg)}};
    const auto start = std::chrono::steady_clock::now();
    try {
        ToyDenoiserConfig dcfg;
        dcfg.d_model = cfg.d_model;
        dcfg.depth = cfg.depth;
        dcfg.heads = cfg.heads;
        dcfg.lambda = cfg.lambda;
        dcfg.mask_mode = cfg.mask_mode;
        dcfg.invert_mask = cfg.invert_mask;
        dcfg.seed = cfg.model_seed;
        ToyDenoiser denoiser(dcfg);

        const Image local = crop_regions(global, {plan.regions[scene]}).front();
        SceneBinding scene_binding =
            SceneBinding::from_image(local, "scene" + std::to_string(scene + 1), cfg.d_model);
        std::vector<PromptBinding> prompts;
        for (std::size_t k = 0; k < n; ++k) {
            const SubPrompt& p = plan.sub_prompts[scene][k];
            prompts.push_back(PromptBinding::from_text(p.text, p.subject_token_index, cfg.d_model));
        }
        LatentBatch batch =
            make_initial_batch(scene_seed, denoiser.geometry(), std::move(prompts), std::move(scene_binding), cfg.steps);
        SamplerOptions options;
        options.threshold = cfg.threshold;
        options.pair_workers = cfg.pair_workers;
        const SamplerOutput out = run_sampler(std::move(batch), bcfg, denoiser, schedule, options);

        bool participation_ok = true;
        for (const auto& step : out.steps) {
            if (!step.blended) continue;
            participation_ok &= step.joint_calls == n * (n - 1) / 2;
            for (std::size_t c : step.joint_calls_per_story) participation_ok &= c == n - 1;
        }
        const bool peak_ok = out.counters.max_batch == peak_denoiser_batch(bcfg) && out.counters.rejected == 0;

        nlohmann::json images = nlohmann::json::array();
        for (std::size_t k = 0; k < out.images.size(); ++k) {
            const std::string file = "scene" + two_digits(scene + 1) + "_story" + two_digits(k + 1) + ".png";
            const auto png = encode_png(out.images[k]);
            write_file_bytes((image_dir / file).string(), png);
            images.push_back({{"file", "images/" + file}, {"digest", hex64(fnv1a64(png))},
                              {"prompt", plan.sub_prompts[scene][k].text}});
            job.outcome.images.push_back((image_dir / file).string());
        }
        job.record["images"] = images;
        job.record["denoiser"] = {{"tag", denoiser.tag()},
                                  {"invocations", out.counters.invocations},
                                  {"joint_invocations", out.counters.joint_invocations},
                                  {"max_batch", out.counters.max_batch},
                                  {"rejected", out.counters.rejected}};
        job.record["checks"] = {{"peak_batch", peak_ok}, {"pair_participation", participation_ok}};
        job.outcome.ok = peak_ok && participation_ok;
        job.record["status"] = job.outcome.ok ? "ok" : "invariant_failed";
    } catch (const GenerationError& e) {
        job.outcome.error = e.what();
        job.record["status"] = "error";
        job.record["error"] = {{"message", e.what()}, {"timestep", e.timestep()}};
    } catch (const std::exception& e) {
        job.outcome.error = e.what();
        job.record["status"] = "error";
        job.record["error"] = {{"message", e.what()}};
    }
    job.record["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return job;
}

std::string memory_report(const nlohmann::json& scenes) {
    std::ostringstream os;
    os << "scene  n   expected_peak_batch  observed_peak_batch  ok\n";
    for (const auto& s : scenes) {
        const std::uint64_t observed = s.contains("denoiser") ? s["denoiser"]["max_batch"].get<std::uint64_t>() : 0;
        const bool ok = s.contains("checks") && s["checks"]["peak_batch"].get<bool>();
        os << std::left << std::setw(7) << s["index"].get<std::size_t>() << std::setw(4) << s["n"].get<std::size_t>()
           << std::setw(21) << s["expected_peak_batch"].get<std::size_t>() << std::setw(21) << observed
           << (ok ? "yes" : "no") << "\n";
    }
    return os.str();
}

}  // namespace

GenerateOutcome cmd_generate(const std::string& project_path, const RunConfig& cfg) {
    cfg.validate();
    const ProjectFile project = load_project(project_path);
    const StoryPlan& plan = project.plan;
    const std::size_t available = plan.story_count();
    const std::size_t n = cfg.stories == 0 ? available : cfg.stories;
    if (n > available) {
        throw ConfigError("project has " + std::to_string(available) + " stories per scene; " +
                          std::to_string(n) + " requested");
    }
    const fs::path project_dir = fs::path(project_path).parent_path();
    const Image global = decode_png(read_file_bytes((project_dir / plan.global_image.path).string()));
    if (global.width != plan.global_image.width || global.height != plan.global_image.height) {
        throw InputError("global image dimensions do not match the project file");
    }

    const fs::path out_dir(cfg.output_dir);
    const fs::path image_dir = out_dir / "images";
    fs::create_directories(image_dir);
    const NoiseSchedule schedule = NoiseSchedule::linear(static_cast<std::size_t>(cfg.steps));

    const auto start = std::chrono::steady_clock::now();
    std::vector<SceneJob> jobs(plan.scene_count());
    const std::size_t workers = std::max<std::size_t>(1, cfg.jobs);
    for (std::size_t first = 0; first < jobs.size(); first += workers) {
        const std::size_t last = std::min(jobs.size(), first + workers);
        if (last - first == 1) {
            jobs[first] = run_scene(plan, global, first, n, cfg, schedule, image_dir);
            continue;
        }
        std::vector<std::future<SceneJob>> futures;
        for (std::size_t s = first; s < last; ++s) {
            futures.push_back(std::async(std::launch::async, run_scene, std::cref(plan), std::cref(global), s, n,
                                         std::cref(cfg), std::cref(schedule), image_dir));
        }
        for (std::size_t s = first; s < last; ++s) jobs[s] = futures[s - first].get();
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    GenerateOutcome outcome;
    nlohmann::json scenes = nlohmann::json::array();
    std::uint64_t peak = 0;
    outcome.all_ok = true;
    for (auto& job : jobs) {
        outcome.all_ok &= job.outcome.ok;
        if (job.record.contains("denoiser")) {
            peak = std::max(peak, job.record["denoiser"]["max_batch"].get<std::uint64_t>());
        }
        scenes.push_back(job.record);
        outcome.scenes.push_back(std::move(job.outcome));
    }
    const BlendingConfig bcfg = cfg.blending_config(n);
    nlohmann::json manifest = {
        {"schema", "storyscene.manifest"},
        {"schema_version", 1},
        {"project", fs::absolute(project_path).string()},
        {"config",
         {{"scenes", plan.scene_count()},
          {"n", n},
          {"steps", cfg.steps},
          {"t1", cfg.t1},
          {"t2", cfg.t2},
          {"blending", cfg.blending},
          {"lambda", cfg.lambda},
          {"mask_mode", cfg.mask_mode == KvMaskMode::drop ? "drop" : "zero"},
          {"invert_mask", cfg.invert_mask},
          {"seed", cfg.seed},
          {"model_seed", cfg.model_seed},
          {"d_model", cfg.d_model},
          {"depth", cfg.depth},
          {"heads", cfg.heads},
          {"deterministic", cfg.deterministic}}},
        {"scenes", scenes},
        {"summary",
         {{"n", n},
          {"blending", cfg.blending},
          {"images", outcome.image_count()},
          {"peak_batch", peak},
          {"expected_peak_batch", peak_denoiser_batch(bcfg)},
          {"wall_seconds", wall},
          {"all_ok", outcome.all_ok}}},
    };
    outcome.manifest_path = (out_dir / "manifest.json").string();
    write_text_file(outcome.manifest_path, manifest.dump(2) + "\n");
    write_text_file((out_dir / "memory_report.txt").string(), memory_report(scenes));
    return outcome;
}

GenerateOutcome cmd_run(const RunConfig& cfg) {
    const PlanOutcome planned = cmd_plan(cfg);
    return cmd_generate(planned.project_path, cfg);
}

JudgeScores cmd_judge(const std::string& project_path, const RunConfig& cfg) {
    auto judge = make_vlm_client(cfg.judge);
    return cmd_judge(project_path, cfg, *judge);
}

JudgeScores cmd_judge(const std::string& project_path, const RunConfig& cfg, VlmClient& judge) {
    const ProjectFile project = load_project(project_path);
    JudgeScores scores = judge_plan(project.plan, judge);
    fs::create_directories(cfg.output_dir);
    const nlohmann::json doc = {{"project", project_path},
                                {"judge_model", judge.model_id()},
                                {"narrative_coherence", scores.narrative_coherence},
                                {"theme_adherence", scores.theme_adherence},
                                {"layout_reasonableness", scores.layout_reasonableness},
                                {"warnings", scores.warnings},
                                {"transcripts", scores.transcripts}};
    write_text_file((fs::path(cfg.output_dir) / "judge.json").string(), doc.dump(2) + "\n");
    return scores;
}

std::vector<ReportRow> collect_report(const std::vector<std::string>& manifest_paths) {
    if (manifest_paths.empty()) throw InputError("report: no manifests given");
    std::vector<ReportRow> rows;
    for (const auto& path : manifest_paths) {
        try {
            const auto doc = nlohmann::json::parse(read_text_file(path));
            const auto& s = doc.at("summary");
            rows.push_back({path, s.at("n").get<std::size_t>(), s.at("blending").get<bool>(),
                            s.at("peak_batch").get<std::size_t>(), s.at("expected_peak_batch").get<std::size_t>(),
                            s.at("wall_seconds").get<double>(), s.at("all_ok").get<bool>()});
        } catch (const nlohmann::json::exception& e) {
            throw InputError("unreadable manifest " + path + ": " + e.what());
        }
    }
    return rows;
}

std::string format_report_text(const std::vector<ReportRow>& rows) {
    std::ostringstream os;
    os << std::left << std::setw(6) << "N" << std::setw(10) << "blending" << std::setw(12) << "peak_batch"
       << std::setw(10) << "expected" << std::setw(12) << "wall_s" << std::setw(6) << "ok"
       << "manifest\n";
    for (const auto& r : rows) {
        os << std::left << std::setw(6) << r.n << std::setw(10) << (r.blending ? "on" : "off") << std::setw(12)
           << r.peak_batch << std::setw(10) << r.expected_peak_batch << std::setw(12) << std::fixed
           << std::setprecision(3) << r.wall_seconds << std::setw(6) << (r.all_ok ? "yes" : "no") << r.manifest
           << "\n";
        os.unsetf(std::ios::fixed);
    }
    return os.str();
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                fields.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else {
            fields.back() += c;
        }
    }
    return fields;
}

}  // namespace

std::string format_report_csv(const std::vector<ReportRow>& rows) {
    std::string out = "manifest,n,blending,peak_batch,expected_peak_batch,wall_seconds,all_ok\n";
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g", r.wall_seconds);
        out += csv_field(r.manifest) + "," + std::to_string(r.n) + "," + (r.blending ? "1" : "0") + "," +
               std::to_string(r.peak_batch) + "," + std::to_string(r.expected_peak_batch) + "," + buf + "," +
               (r.all_ok ? "1" : "0") + "\n";
    }
    return out;
}

std::vector<ReportRow> parse_report_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line.rfind("manifest,", 0) != 0) throw InputError("report CSV: missing header");
    std::vector<ReportRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 7) throw InputError("report CSV: expected 7 fields, got " + std::to_string(f.size()));
        try {
            rows.push_back({f[0], std::stoul(f[1]), f[2] == "1", std::stoul(f[3]), std::stoul(f[4]), std::stod(f[5]),
                            f[6] == "1"});
        } catch (const std::logic_error&) {
            throw InputError("report CSV: malformed row: " + line);
        }
    }
    return rows;
}

std::string cmd_report(const std::vector<std::string>& manifest_paths, const std::string& format) {
    const auto rows = collect_report(manifest_paths);
    if (format == "csv") return format_report_csv(rows);
    if (format == "text") return format_report_text(rows);
    throw InputError("unknown report format '" + format + "' (expected text or csv)");
}

}  // namespace storyscene
