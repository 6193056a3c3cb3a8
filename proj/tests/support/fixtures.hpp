// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "storyscene/image.hpp"
#include "storyscene/scheduler/noise_schedule.hpp"
#include "storyscene/scheduler/sampler.hpp"

namespace fixture {

inline const std::vector<std::string>& story_lines() {
    static const std::vector<std::string> lines = {
        "A fox watches snowflakes drift past the lantern.",
        "The girl builds a snowman beside the frozen pond.",
        "An owl shakes frost from its wings on the branch.",
        "A boy traces constellations in the icy window.",
        "The deer wanders under a sky of falling stars.",
        "A rabbit hides in the drifts near the old fence.",
        "The sailor lights a fire in the cabin hearth.",
    };
    return lines;
}

struct Setup {
    storyscene::ToyDenoiserConfig cfg;
    storyscene::LatentBatch batch;
    storyscene::NoiseSchedule schedule;
};

// Small toy problem: n stories on a 4×4 latent grid with a procedural scene.
inline Setup make_setup(std::size_t n, int steps, std::uint64_t seed, std::size_t heads = 1, std::size_t depth = 1) {
    Setup s;
    s.cfg.geometry = {4, 4, 4};
    s.cfg.d_model = 16;
    s.cfg.heads = heads;
    s.cfg.depth = depth;
    s.cfg.seed = seed;
    std::vector<storyscene::PromptBinding> prompts;
    for (std::size_t i = 0; i < n; ++i) {
        const std::string& line = story_lines()[i % story_lines().size()];
        prompts.push_back(storyscene::PromptBinding::from_text(line, 1, s.cfg.d_model));
    }
    auto scene = storyscene::SceneBinding::from_image(storyscene::procedural_image(seed, 64, 64), "scene", s.cfg.d_model);
    s.batch = storyscene::make_initial_batch(seed, s.cfg.geometry, std::move(prompts), std::move(scene), steps);
    s.schedule = storyscene::NoiseSchedule::linear(static_cast<std::size_t>(steps));
    return s;
}

// ᾱ for countdown indices 1..T of the linear 1e-4..0.02 schedule, computed from scratch.
inline std::vector<double> linear_alphas(int steps) {
    const int train = 1000;
    std::vector<double> cum(train);
    double prod = 1.0;
    for (int i = 0; i < train; ++i) {
        prod *= 1.0 - (1e-4 + (0.02 - 1e-4) * i / (train - 1));
        cum[i] = prod;
    }
    std::vector<double> out;
    for (int t = 1; t <= steps; ++t) out.push_back(cum[(t - 1) * (train / steps)]);
    return out;
}

inline oracle::ReferenceInput reference_input(const Setup& s, const storyscene::ToyWeights& weights, int t1, int t2) {
    oracle::ReferenceInput in;
    in.cfg = s.cfg;
    in.weights = weights;
    const std::size_t hw = s.cfg.geometry.tokens();
    for (const auto& z : s.batch.latents) in.latents.push_back(oracle::to_mat(z.reshaped({hw, s.cfg.geometry.channels})));
    for (const auto& p : s.batch.prompts) {
        in.texts.push_back(oracle::to_mat(p.tokens));
        in.subject.push_back(p.subject_token_index);
    }
    in.scene = oracle::to_mat(s.batch.scene.tokens);
    in.total_steps = s.batch.timestep;
    in.alphas = linear_alphas(in.total_steps);
    in.t1 = t1;
    in.t2 = t2;
    return in;
}

inline double max_latent_diff(const std::vector<storyscene::Tensor>& got, const std::vector<oracle::Mat>& want) {
    double worst = 0.0;
    for (std::size_t s = 0; s < got.size(); ++s) {
        const std::size_t c = want[s][0].size();
        for (std::size_t i = 0; i < want[s].size(); ++i)
            for (std::size_t k = 0; k < c; ++k) worst = std::max(worst, std::abs(got[s][i * c + k] - want[s][i][k]));
    }
    return worst;
}

}  // namespace fixture
