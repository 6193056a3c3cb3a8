// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#include "storyscene/scheduler/sampler.hpp"

#include <algorithm>
#include <future>
#include <random>
#include <string>

#include "storyscene/denoiser/toy_denoiser.hpp"
#include "storyscene/error.hpp"
#include "storyscene/hash.hpp"

namespace storyscene {

void BlendingConfig::validate() const {
    if (n < 1) throw ConfigError("story count N must be >= 1");
    if (total_steps < 1) throw ConfigError("total steps T must be >= 1");
    if (!(0 <= t1 && t1 <= t2 && t2 <= total_steps)) {
        throw ConfigError("blending window must satisfy 0 <= T1 <= T2 <= T (got T1=" + std::to_string(t1) +
                          ", T2=" + std::to_string(t2) + ", T=" + std::to_string(total_steps) + ")");
    }
}

bool BlendingConfig::blends_at(int t) const {
    return blending_enabled && n >= 2 && t >= t1 && t <= t2;
}

std::vector<std::pair<std::size_t, std::size_t>> enumerate_pairs(std::size_t n) {
    if (n < 2) throw PreconditionError("enumerate_pairs: need at least two stories");
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    return pairs;
}

void LatentBatch::validate() const {
    if (latents.empty()) throw PreconditionError("latent batch is empty");
    for (const auto& z : latents) {
        if (z.shape() != latents.front().shape()) throw DimensionError("latents in a batch must share shape");
    }
    if (prompts.size() != latents.size()) throw PreconditionError("one prompt binding per latent required");
    if (!tracks.empty() && tracks.size() != latents.size()) {
        throw PreconditionError("one attention track per latent required");
    }
}

LatentBatch make_initial_batch(std::uint64_t seed, const LatentGeometry& geometry,
                               std::vector<PromptBinding> prompts, SceneBinding scene, int total_steps) {
    LatentBatch batch;
    batch.timestep = total_steps;
    for (std::size_t i = 0; i < prompts.size(); ++i) {
        std::mt19937_64 rng(derive_seed(seed, i + 1));
        std::normal_distribution<double> normal(0.0, 1.0);
        Tensor z(geometry.shape());
        for (double& v : z.values()) v = normal(rng);
        batch.latents.push_back(std::move(z));
    }
    batch.prompts = std::move(prompts);
    batch.scene = std::move(scene);
    batch.tracks.resize(batch.latents.size());
    return batch;
}

namespace {

std::vector<SubjectMask> story_masks(const LatentBatch& batch, std::size_t story, const LatentGeometry& g,
                                     const SamplerOptions& options) {
    std::vector<SubjectMask> masks;
    if (!options.derive_masks || batch.tracks.empty()) return masks;
    const auto& layers = batch.tracks[story].layers;
    if (layers.empty() || layers.front().step_count() == 0) return masks;
    for (const auto& state : layers) {
        masks.push_back(derive_subject_mask(state, batch.prompts[story].subject_token_index, g.height,
                                            g.width, options.threshold));
    }
    return masks;
}

struct Call {
    std::size_t a;
    std::size_t b;  // == a for independent calls
};

}  // namespace

LatentBatch blended_denoise_step(const LatentBatch& batch, const BlendingConfig& cfg, Denoiser& denoiser,
                                 const NoiseSchedule& schedule, const SamplerOptions& options,
                                 StepReport* report) {
    batch.validate();
    const int t = batch.timestep;
    if (t < 2) throw PreconditionError("blended_denoise_step requires timestep >= 2");
    const std::size_t n = batch.size();
    if (cfg.n != n) throw PreconditionError("blending config N does not match batch size");
    const LatentGeometry g = denoiser.geometry();
    const std::size_t layers = denoiser.layer_count();

    std::vector<DenoiseMember> members(n);
    for (std::size_t i = 0; i < n; ++i) {
        members[i] = {&batch.latents[i], &batch.prompts[i], story_masks(batch, i, g, options), i};
    }

    const bool blended = cfg.blends_at(t);
    std::vector<Call> calls;
    if (blended) {
        for (auto [i, j] : enumerate_pairs(n)) calls.push_back({i, j});
    } else {
        for (std::size_t i = 0; i < n; ++i) calls.push_back({i, i});
    }

    auto evaluate = [&](const Call& call) {
        const bool joint = call.a != call.b;
        DenoiseMember pair[2] = {members[call.a], members[call.b]};
        DenoiseRequest req{t, std::span<const DenoiseMember>(pair, joint ? 2 : 1), &batch.scene, joint};
        try {
            return denoiser.predict_eps(req);
        } catch (const GenerationError&) {
            throw;
        } catch (const std::exception& e) {
            throw GenerationError(std::string("denoiser failed: ") + e.what(), t, static_cast<int>(call.a),
                                  joint ? static_cast<int>(call.b) : -1);
        }
    };

    std::vector<DenoiseResult> results(calls.size());
    const std::size_t workers = std::max<std::size_t>(1, options.pair_workers);
    for (std::size_t start = 0; start < calls.size(); start += workers) {
        const std::size_t end = std::min(calls.size(), start + workers);
        if (end - start == 1) {
            results[start] = evaluate(calls[start]);
            continue;
        }
        std::vector<std::future<DenoiseResult>> futures;
        for (std::size_t c = start; c < end; ++c) {
            futures.push_back(std::async(std::launch::async, evaluate, std::cref(calls[c])));
        }
        for (std::size_t c = start; c < end; ++c) results[c] = futures[c - start].get();
    }

    // Fixed-order reduction: calls are already in lexicographic pair order.
    std::vector<Tensor> acc(n, Tensor(batch.latents.front().shape()));
    std::vector<std::vector<Tensor>> map_sums(n);
    std::vector<std::size_t> map_counts(n, 0);
    std::vector<std::size_t> joint_per_story(n, 0);
    for (std::size_t c = 0; c < calls.size(); ++c) {
        const bool joint = calls[c].a != calls[c].b;
        const std::size_t ids[2] = {calls[c].a, calls[c].b};
        for (std::size_t m = 0; m < (joint ? 2u : 1u); ++m) {
            const std::size_t s = ids[m];
            add_inplace(acc[s], results[c].eps[m]);
            if (joint) ++joint_per_story[s];
            auto& sums = map_sums[s];
            if (sums.empty()) {
                sums = results[c].text_maps[m];
            } else {
                for (std::size_t l = 0; l < sums.size(); ++l) add_inplace(sums[l], results[c].text_maps[m][l]);
            }
            ++map_counts[s];
        }
    }

    const double norm = blended ? static_cast<double>(n - 1) : 1.0;
    LatentBatch next;
    next.timestep = t - 1;
    next.prompts = batch.prompts;
    next.scene = batch.scene;
    next.tracks = batch.tracks.empty() ? std::vector<StoryTrack>(n) : batch.tracks;
    for (std::size_t i = 0; i < n; ++i) {
        const Tensor eps = norm == 1.0 ? acc[i] : scale(acc[i], 1.0 / norm);
        next.latents.push_back(ddim_step(batch.latents[i], eps, t, schedule));

        auto& track = next.tracks[i].layers;
        if (track.empty()) track.resize(layers);
        for (std::size_t l = 0; l < map_sums[i].size() && l < track.size(); ++l) {
            const double k = static_cast<double>(map_counts[i]);
            track[l].accumulate(map_counts[i] == 1 ? map_sums[i][l] : scale(map_sums[i][l], 1.0 / k));
        }
    }

    if (report) {
        report->timestep = t;
        report->blended = blended;
        report->joint_calls = blended ? calls.size() : 0;
        report->single_calls = blended ? 0 : calls.size();
        report->norm = norm;
        report->joint_calls_per_story = std::move(joint_per_story);
    }
    return next;
}

SamplerOutput run_sampler(LatentBatch initial, const BlendingConfig& cfg, Denoiser& denoiser,
                          const NoiseSchedule& schedule, const SamplerOptions& options) {
    cfg.validate();
    initial.validate();
    if (initial.timestep != cfg.total_steps) {
        throw PreconditionError("initial batch must start at t = T");
    }
    if (static_cast<std::size_t>(cfg.total_steps) > schedule.steps()) {
        throw ConfigError("schedule has fewer inference steps than T");
    }
    if (initial.tracks.empty()) initial.tracks.resize(initial.size());

    SamplerOutput out;
    LatentBatch batch = std::move(initial);
    while (batch.timestep >= 2) {
        StepReport report;
        try {
            batch = blended_denoise_step(batch, cfg, denoiser, schedule, options, &report);
        } catch (const GenerationError&) {
            throw;
        } catch (const std::exception& e) {
            throw GenerationError(std::string("step failed: ") + e.what(), batch.timestep);
        }
        out.steps.push_back(std::move(report));
    }
    const LatentGeometry g = denoiser.geometry();
    for (const auto& z : batch.latents) out.images.push_back(decode_latent(z, g));
    out.final_latents = std::move(batch.latents);
    out.counters = denoiser.counters();
    return out;
}

std::size_t peak_denoiser_batch(const BlendingConfig& cfg) {
    if (!cfg.blending_enabled || cfg.n < 2) return 1;
    // The loop visits t = T … 2; blending needs that range to meet [T1, T2].
    const int lo = std::max(cfg.t1, 2);
    const int hi = std::min(cfg.t2, cfg.total_steps);
    return lo <= hi ? 2 : 1;
}

}  // namespace storyscene
