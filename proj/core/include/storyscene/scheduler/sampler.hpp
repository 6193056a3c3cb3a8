// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "storyscene/attention/attention.hpp"
#include "storyscene/denoiser/denoiser.hpp"
#include "storyscene/image.hpp"
#include "storyscene/scheduler/noise_schedule.hpp"

namespace storyscene {

struct BlendingConfig {
    int t1 = 0;
    int t2 = 25;
    std::size_t n = 5;
    int total_steps = 50;
    bool blending_enabled = true;

    // 0 <= t1 <= t2 <= total_steps, n >= 1.
    void validate() const;
    // True when step t runs pairwise joint denoising.
    bool blends_at(int t) const;
};

// Unordered pairs (i, j), i < j, 0-based, lexicographic. Requires n >= 2.
std::vector<std::pair<std::size_t, std::size_t>> enumerate_pairs(std::size_t n);

// Per-story running cross-attention state, one entry per denoiser layer.
struct StoryTrack {
    std::vector<CrossAttentionState> layers;
};

struct LatentBatch {
    std::vector<Tensor> latents;
    int timestep = 0;
    std::vector<PromptBinding> prompts;
    SceneBinding scene;
    std::vector<StoryTrack> tracks;

    std::size_t size() const noexcept { return latents.size(); }
    void validate() const;
};

/// Seeded standard-normal latents for n stories at timestep T.
LatentBatch make_initial_batch(std::uint64_t seed, const LatentGeometry& geometry,
                               std::vector<PromptBinding> prompts, SceneBinding scene, int total_steps);

struct SamplerOptions {
    ThresholdPolicy threshold = ThresholdPolicy::mean();
    // When false every call sees empty masks (no subject gating).
    bool derive_masks = true;
    // Concurrent pair evaluations per step; outputs are still reduced in
    // lexicographic pair order, so results do not depend on this value.
    std::size_t pair_workers = 1;
};

struct StepReport {
    int timestep = 0;
    bool blended = false;
    std::size_t joint_calls = 0;
    std::size_t single_calls = 0;
    double norm = 1.0;
    std::vector<std::size_t> joint_calls_per_story;
};

LatentBatch blended_denoise_step(const LatentBatch& batch, const BlendingConfig& cfg, Denoiser& denoiser,
                                 const NoiseSchedule& schedule, const SamplerOptions& options = {},
                                 StepReport* report = nullptr);

struct SamplerOutput {
    std::vector<Image> images;
    std::vector<Tensor> final_latents;
    std::vector<StepReport> steps;
    DenoiserCounters counters;
};

/// Runs t = T … 2 through blended_denoise_step and decodes Z₁.
SamplerOutput run_sampler(LatentBatch initial, const BlendingConfig& cfg, Denoiser& denoiser,
                          const NoiseSchedule& schedule, const SamplerOptions& options = {});

// Largest number of latents any single denoiser call sees under cfg.
std::size_t peak_denoiser_batch(const BlendingConfig& cfg);

}  // namespace storyscene
