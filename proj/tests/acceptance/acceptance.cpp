// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion; exit status is
// nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <string>

#include "fixtures.hpp"
#include "storyscene/app/commands.hpp"
#include "storyscene/attention/attention.hpp"
#include "storyscene/denoiser/toy_denoiser.hpp"
#include "storyscene/error.hpp"
#include "storyscene/hash.hpp"
#include "storyscene/planner/planner.hpp"
#include "storyscene/planner/project_file.hpp"
#include "storyscene/planner/templates.hpp"

using namespace storyscene;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

Tensor random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, double scale = 1.0) {
    std::normal_distribution<double> d(0.0, scale);
    Tensor t({r, c});
    for (double& v : t.values()) v = d(rng);
    return t;
}

SubjectMask random_binary(std::mt19937_64& rng, std::size_t h, std::size_t w) {
    std::bernoulli_distribution b(0.5);
    std::vector<double> v(h * w);
    for (double& x : v) x = b(rng) ? 1.0 : 0.0;
    return SubjectMask(h, w, v);
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("storyscene_acceptance_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

// Records which stories share each denoiser call.
class CountingDenoiser final : public Denoiser {
public:
    std::string tag() const override { return "counting"; }
    LatentGeometry geometry() const override { return {2, 2, 4}; }
    std::size_t layer_count() const override { return 0; }
    std::vector<std::vector<std::size_t>> calls;

protected:
    DenoiseResult run(const DenoiseRequest& req) override {
        DenoiseResult r;
        r.text_maps.resize(req.members.size());
        std::vector<std::size_t> ids;
        for (const auto& m : req.members) {
            ids.push_back(m.story);
            r.eps.push_back(scale(*m.latent, 0.5));
        }
        calls.push_back(ids);
        return r;
    }
};

Outcome noise_blending_oracle() {
    const auto start = Clock::now();
    double worst = 0.0;
    for (std::size_t n : {2u, 3u, 4u, 5u}) {
        auto s = fixture::make_setup(n, 8, 100 + n);
        ToyDenoiser d(s.cfg);
        const auto out = run_sampler(s.batch, {0, 8, n, 8, true}, d, s.schedule);
        const auto ref = oracle::reference_sampler(fixture::reference_input(s, d.weights(), 0, 8));
        worst = std::max(worst, fixture::max_latent_diff(out.final_latents, ref));
    }
    const double t = seconds_since(start);
    return {worst <= 1e-9 && t < 10.0, fmt("max |diff| = %.3g", worst) + fmt(", %.2f s", t)};
}

Outcome pair_combinatorics() {
    bool ok = true;
    for (std::size_t n = 2; n <= 25; ++n) {
        ok &= enumerate_pairs(n).size() == n * (n - 1) / 2;
        CountingDenoiser d;
        LatentBatch b;
        b.timestep = 4;
        for (std::size_t i = 0; i < n; ++i) {
            b.latents.emplace_back(Shape{2, 2, 4}, static_cast<double>(i));
            b.prompts.push_back(PromptBinding::from_text("A fox", 1, 4));
        }
        const BlendingConfig cfg{0, 4, n, 4, true};
        const auto sched = NoiseSchedule::linear(4);
        for (int step = 0; step < 2; ++step) {
            d.calls.clear();
            b = blended_denoise_step(b, cfg, d, sched, {});
            std::vector<std::size_t> joint(n, 0);
            std::set<std::pair<std::size_t, std::size_t>> seen;
            for (const auto& c : d.calls) {
                if (c.size() != 2) {
                    ok = false;
                    continue;
                }
                ++joint[c[0]];
                ++joint[c[1]];
                seen.insert({std::min(c[0], c[1]), std::max(c[0], c[1])});
            }
            ok &= d.calls.size() == n * (n - 1) / 2 && seen.size() == d.calls.size();
            for (auto k : joint) ok &= k == n - 1;
        }
    }
    return {ok, "N = 2..25, two blended steps each"};
}

Outcome batch_size_constancy() {
    const auto start = Clock::now();
    const fs::path dir = scratch("batch");
    ProjectFile project;
    project.plan.theme = "batch";
    project.plan.global_description = "a field";
    const Image global = procedural_image(3, 256, 256);
    const auto png = encode_png(global);
    write_file_bytes((dir / "global.png").string(), png);
    project.plan.global_image = {"global.png", 256, 256, hex64(fnv1a64(png))};
    project.plan.regions = {{0, 0, 128, 128}};
    project.plan.sub_prompts.resize(1);
    for (std::size_t i = 0; i < 25; ++i) {
        project.plan.sub_prompts[0].push_back(SubPrompt::tagged(fixture::story_lines()[i % 7]));
    }
    const std::string project_path = (dir / "project.json").string();
    save_project(project_path, project);

    std::vector<std::string> on, off;
    for (std::size_t n : {2u, 5u, 10u, 15u, 20u, 25u}) {
        for (bool blending : {true, false}) {
            RunConfig c;
            c.stories = n;
            c.steps = 4;
            c.t2 = 4;
            c.d_model = 16;
            c.blending = blending;
            c.output_dir = (dir / ((blending ? "on" : "off") + std::to_string(n))).string();
            (blending ? on : off).push_back(cmd_generate(project_path, c).manifest_path);
        }
    }
    const auto rows_on = parse_report_csv(cmd_report(on, "csv"));
    const auto rows_off = parse_report_csv(cmd_report(off, "csv"));
    bool ok = rows_on.size() == 6 && rows_off.size() == 6;
    std::string column;
    for (const auto& r : rows_on) {
        ok &= r.peak_batch == 2 && r.all_ok;
        column += std::to_string(r.peak_batch);
    }
    column += " / off: ";
    for (const auto& r : rows_off) {
        ok &= r.peak_batch == 1 && r.all_ok;
        column += std::to_string(r.peak_batch);
    }
    const double t = seconds_since(start);
    ok &= t < 60.0;
    return {ok, "peak batch on: " + column + fmt(", %.2f s", t)};
}

Outcome scene_inject_identities() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> lam(0.0, 3.0);
    std::uniform_int_distribution<std::size_t> dim(1, 6);
    double worst = 0.0;
    bool exact = true;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t h = dim(rng), w = dim(rng), l = dim(rng), l2 = dim(rng), d = dim(rng);
        const Tensor a = softmax_rows(random_matrix(rng, h * w, l));
        const Tensor v = random_matrix(rng, l, d);
        const Tensor a2 = softmax_rows(random_matrix(rng, h * w, l2));
        const Tensor v2 = random_matrix(rng, l2, d);
        const SubjectMask m = random_binary(rng, h, w);
        const Tensor text_only = matmul(a, v);
        const Tensor zero = scene_inject(a, v, a2, v2, m, 0.0);
        exact &= zero == text_only;
        exact &= scene_inject(a, v, a2, v2, SubjectMask::ones(h, w), lam(rng)) == zero;
        const double l1 = lam(rng), l2v = lam(rng);
        const Tensor lhs = sub(add(scene_inject(a, v, a2, v2, m, l1), scene_inject(a, v, a2, v2, m, l2v)), zero);
        worst = std::max(worst, max_abs_diff(lhs, scene_inject(a, v, a2, v2, m, l1 + l2v)));
    }
    return {exact && worst <= 1e-9, std::string(exact ? "identities bit-exact" : "identity mismatch") +
                                        fmt(", linearity max |diff| = %.3g (1000 trials)", worst)};
}

Outcome scene_sharing_reduction() {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<std::size_t> dim(1, 5);
    std::uniform_int_distribution<std::size_t> heads_pick(1, 2);
    double worst = 0.0, worst_inv = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t h = dim(rng), w = dim(rng), heads = heads_pick(rng), d = 2 * dim(rng);
        const std::size_t t = h * w;
        const AttentionBranch a{random_matrix(rng, t, d), random_matrix(rng, t, d), random_matrix(rng, t, d)};
        const AttentionBranch b{random_matrix(rng, t, d), random_matrix(rng, t, d), random_matrix(rng, t, d)};
        const SceneSharingOptions opts{KvMaskMode::drop, false, heads};
        const auto full = scene_sharing_attention(a, b, SubjectMask::ones(h, w), SubjectMask::ones(h, w), opts);
        worst = std::max(worst, max_abs_diff(full.first, multi_head_attention(a.query, a.key, a.value, heads)));
        worst = std::max(worst, max_abs_diff(full.second, multi_head_attention(b.query, b.key, b.value, heads)));

        const SubjectMask ma = random_binary(rng, h, w), mb = random_binary(rng, h, w);
        for (auto mode : {KvMaskMode::drop, KvMaskMode::zero}) {
            const auto inv = scene_sharing_attention(a, b, ma, mb, {mode, true, heads});
            const auto cmp = scene_sharing_attention(a, b, ma.complement(), mb.complement(), {mode, false, heads});
            worst_inv = std::max({worst_inv, max_abs_diff(inv.first, cmp.first), max_abs_diff(inv.second, cmp.second)});
        }
    }
    return {worst <= 1e-12 && worst_inv <= 1e-12,
            fmt("reduction max |diff| = %.3g", worst) + fmt(", invert max |diff| = %.3g (500 trials)", worst_inv)};
}

Outcome ddim_correctness() {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    double worst = 0.0;
    bool fixed = true;
    for (int trial = 0; trial < 200; ++trial) {
        double a_t = u(rng), a_prev = u(rng);
        if (a_prev < a_t) std::swap(a_t, a_prev);
        if (a_prev == a_t) continue;
        const auto sched = NoiseSchedule::from_alphas_cumprod({a_prev, a_t});
        const Tensor z = random_matrix(rng, 4, 5), eps = random_matrix(rng, 4, 5);
        const Tensor out = ddim_step(z, eps, 2, sched);
        for (std::size_t i = 0; i < z.numel(); ++i) {
            worst = std::max(worst, std::abs(out[i] - oracle::ddim(z[i], eps[i], a_t, a_prev)));
        }
        fixed &= ddim_update(z, Tensor(z.shape()), a_t, a_t) == z;
    }
    const auto lin = NoiseSchedule::linear(50);
    const Tensor z = random_matrix(rng, 3, 3), eps = random_matrix(rng, 3, 3);
    for (int t = 1; t <= 50; ++t) {
        const Tensor out = ddim_step(z, eps, t, lin);
        const double a_t = lin.alpha_cumprod_at(t), a_prev = lin.alpha_cumprod_at(t - 1);
        for (std::size_t i = 0; i < z.numel(); ++i) worst = std::max(worst, std::abs(out[i] - oracle::ddim(z[i], eps[i], a_t, a_prev)));
    }
    return {worst <= 1e-12 && fixed, fmt("max |diff| = %.3g", worst) + (fixed ? ", fixed point exact" : ", fixed point broken")};
}

Outcome snapping() {
    std::mt19937_64 rng(31337);
    const std::int64_t lo = std::numeric_limits<std::int64_t>::min(), hi = std::numeric_limits<std::int64_t>::max();
    const std::int64_t extremes[] = {lo, lo + 1, -1024, -1, 0, 1, 63, 64, 65, 511, 1023, 1024, 1025, 4096, hi - 1, hi};
    std::uniform_int_distribution<std::int64_t> any(lo, hi);
    std::uniform_int_distribution<std::int64_t> near(-2048, 3072);
    std::uniform_int_distribution<int> kind(0, 2);
    std::uniform_int_distribution<std::size_t> ext(0, std::size(extremes) - 1);
    std::uniform_int_distribution<std::size_t> dim(1, 4096);
    std::size_t failures = 0;
    for (int trial = 0; trial < 100000; ++trial) {
        std::array<std::int64_t, 4> q;
        for (auto& v : q) {
            const int k = kind(rng);
            v = k == 0 ? extremes[ext(rng)] : k == 1 ? near(rng) : any(rng);
        }
        const std::size_t w = trial % 2 ? 1024 : dim(rng), h = trial % 2 ? 1024 : dim(rng);
        const SceneRegion r = snap_region(q, w, h);
        const bool in_bounds = r.x1 >= 0 && r.y1 >= 0 && r.x2 <= static_cast<std::int64_t>(w) &&
                               r.y2 <= static_cast<std::int64_t>(h) && r.x1 < r.x2 && r.y1 < r.y2;
        if (!in_bounds || snap_region(r.x1, r.y1, r.x2, r.y2, w, h) != r) ++failures;
    }
    const bool appendix = snap_region(18, 8, 506, 499, 1024, 1024) == SceneRegion{18, 8, 506, 499};
    return {failures == 0 && appendix, std::to_string(failures) + " violations in 100000 quadruples; [18,8,506,499] " +
                                           (appendix ? "unchanged" : "CHANGED")};
}

Outcome template_fidelity() {
    auto golden = [](const std::string& name) {
        std::string s = read_text_file(std::string(STORYSCENE_GOLDEN_DIR) + "/" + name);
        if (!s.empty() && s.back() == '\n') s.pop_back();
        return s;
    };
    const bool c = render_conceptualize(kExemplarTheme) == golden("conceptualize_snowy.txt");
    const bool k = render_craft(kExemplarTheme, 1024, 1024, 4, 5) == golden("craft_snowy_1024_m4_n5.txt");
    const bool k2 = render_craft("A lighthouse at the edge of the world", 768, 512, 3, 2) ==
                    golden("craft_lighthouse_768x512_m3_n2.txt");
    return {c && k && k2, std::string("conceptualize ") + (c ? "match" : "DIFF") + ", craft " + (k && k2 ? "match" : "DIFF")};
}

Outcome end_to_end() {
    const auto start = Clock::now();
    auto run = [](const fs::path& dir) {
        RunConfig c;
        c.theme = kExemplarTheme;
        c.output_dir = dir.string();
        return cmd_run(c);
    };
    const fs::path a = scratch("e2e_a"), b = scratch("e2e_b");
    const auto ra = run(a);
    const double t = seconds_since(start);
    const auto rb = run(b);
    bool same = read_text_file((a / "project.json").string()) == read_text_file((b / "project.json").string());
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(a / "images")) {
        ++files;
        same &= read_file_bytes(e.path().string()) == read_file_bytes((b / "images" / e.path().filename()).string());
    }
    const bool ok = ra.all_ok && rb.all_ok && ra.image_count() == 20 && files == 20 && same && t < 120.0;
    return {ok, std::to_string(ra.image_count()) + " images, " + (same ? "identical bytes" : "bytes differ") +
                    fmt(", %.2f s per run", t)};
}

Outcome softmax_and_mask_invariants() {
    std::mt19937_64 rng(4242);
    std::uniform_int_distribution<std::size_t> dim(1, 12);
    std::uniform_real_distribution<double> mag(0.0, 4.0);
    std::size_t violations = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t r = dim(rng), c = dim(rng);
        const Tensor s = softmax_rows(random_matrix(rng, r, c, std::pow(10.0, mag(rng) - 1.0)));
        for (std::size_t i = 0; i < r; ++i) {
            double total = 0.0;
            for (double v : s.row(i)) {
                if (!(v >= 0.0 && v <= 1.0)) ++violations;
                total += v;
            }
            if (std::abs(total - 1.0) > 1e-9) ++violations;
        }

        const std::size_t h = dim(rng), w = dim(rng);
        CrossAttentionState state;
        state.accumulate(softmax_rows(random_matrix(rng, h * w, c)));
        const SubjectMask m = derive_subject_mask(state, trial % c, h, w);
        const SubjectMask resized = m.resized(dim(rng), dim(rng));
        for (const SubjectMask* mask : {&m, &resized}) {
            for (double v : mask->values()) {
                if (v != 0.0 && v != 1.0) ++violations;
            }
        }
        if (m.resized(h, w) != m) ++violations;
        const SubjectMask background = m.complement();
        for (double v : background.values()) {
            if (v < 0.0 || v > 1.0) ++violations;
        }
    }
    return {violations == 0, std::to_string(violations) + " violations in 10000 cases"};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"noise-blending oracle equivalence", noise_blending_oracle},
        {"pair combinatorics", pair_combinatorics},
        {"batch-size constancy", batch_size_constancy},
        {"scene injection identities", scene_inject_identities},
        {"scene-sharing reduction and inversion", scene_sharing_reduction},
        {"DDIM correctness", ddim_correctness},
        {"region snapping", snapping},
        {"template fidelity", template_fidelity},
        {"end-to-end with mocks", end_to_end},
        {"softmax and mask invariants", softmax_and_mask_invariants},
    };
    int failed = 0;
    int index = 0;
    for (const auto& [name, check] : criteria) {
        ++index;
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s [%02d] %s: %s\n", o.pass ? "PASS" : "FAIL", index, name.c_str(), o.detail.c_str());
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
