// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <random>

#include "storyscene/attention/attention.hpp"
#include "storyscene/denoiser/toy_denoiser.hpp"
#include "storyscene/image.hpp"
#include "storyscene/scheduler/sampler.hpp"

using namespace storyscene;

namespace {

Tensor random_matrix(std::uint64_t seed, std::size_t r, std::size_t c) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    Tensor t({r, c});
    for (double& v : t.values()) v = d(rng);
    return t;
}

SubjectMask half_mask(std::size_t side) {
    std::vector<double> v(side * side);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = (i % side) < side / 2 ? 1.0 : 0.0;
    return SubjectMask(side, side, v);
}

// One blended step; the work grows with the N(N-1)/2 pairs while the
// denoiser batch stays at two.
void BM_BlendedStep(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    ToyDenoiserConfig cfg;
    cfg.geometry = {8, 8, 4};
    cfg.d_model = 32;
    cfg.seed = 1;
    ToyDenoiser denoiser(cfg);
    std::vector<PromptBinding> prompts;
    for (std::size_t i = 0; i < n; ++i) {
        prompts.push_back(PromptBinding::from_text("A small red fox walks through the snow", 4, cfg.d_model));
    }
    auto scene = SceneBinding::from_image(procedural_image(1, 64, 64), "scene", cfg.d_model);
    const int steps = 10;
    const LatentBatch batch = make_initial_batch(7, cfg.geometry, std::move(prompts), std::move(scene), steps);
    const auto schedule = NoiseSchedule::linear(steps);
    const BlendingConfig blending{0, steps, n, steps, true};
    for (auto _ : state) {
        benchmark::DoNotOptimize(blended_denoise_step(batch, blending, denoiser, schedule));
    }
    state.counters["pairs"] = static_cast<double>(n * (n - 1) / 2);
}
BENCHMARK(BM_BlendedStep)->Arg(2)->Arg(5)->Arg(10)->Arg(15)->Arg(20)->Arg(25)->Unit(benchmark::kMillisecond);

void BM_Softmax(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Tensor x = random_matrix(1, n, n);
    for (auto _ : state) benchmark::DoNotOptimize(softmax_rows(x));
}
BENCHMARK(BM_Softmax)->Arg(64)->Arg(256);

void BM_Attention(benchmark::State& state) {
    const auto tokens = static_cast<std::size_t>(state.range(0));
    const Tensor q = random_matrix(1, tokens, 64), k = random_matrix(2, tokens, 64), v = random_matrix(3, tokens, 64);
    for (auto _ : state) benchmark::DoNotOptimize(multi_head_attention(q, k, v, 4));
}
BENCHMARK(BM_Attention)->Arg(64)->Arg(256);

void BM_SceneInject(benchmark::State& state) {
    const std::size_t side = 16, tokens = side * side;
    const Tensor a = softmax_rows(random_matrix(1, tokens, 77)), v = random_matrix(2, 77, 64);
    const Tensor a2 = softmax_rows(random_matrix(3, tokens, 64)), v2 = random_matrix(4, 64, 64);
    const SubjectMask mask = half_mask(side);
    for (auto _ : state) benchmark::DoNotOptimize(scene_inject(a, v, a2, v2, mask, 0.5));
}
BENCHMARK(BM_SceneInject);

void BM_SceneSharing(benchmark::State& state) {
    const std::size_t side = 16, tokens = side * side;
    const AttentionBranch a{random_matrix(1, tokens, 64), random_matrix(2, tokens, 64), random_matrix(3, tokens, 64)};
    const AttentionBranch b{random_matrix(4, tokens, 64), random_matrix(5, tokens, 64), random_matrix(6, tokens, 64)};
    const SubjectMask mask = half_mask(side);
    const SceneSharingOptions opts{state.range(0) == 0 ? KvMaskMode::drop : KvMaskMode::zero, false, 4};
    for (auto _ : state) benchmark::DoNotOptimize(scene_sharing_attention(a, b, mask, mask, opts));
}
BENCHMARK(BM_SceneSharing)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
