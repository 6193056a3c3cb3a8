// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "storyscene/attention/attention.hpp"
#include "storyscene/denoiser/denoiser.hpp"
#include "storyscene/image.hpp"

namespace storyscene {

struct ToyDenoiserConfig {
    LatentGeometry geometry;
    std::size_t d_model = 32;
    std::size_t depth = 1;
    std::size_t heads = 1;
    double lambda = 0.5;
    KvMaskMode mask_mode = KvMaskMode::drop;
    bool invert_mask = false;
    std::uint64_t seed = 0;
    // Standard deviation multiplier of the output head; small keeps DDIM latents bounded.
    double head_scale = 0.1;

    void validate() const;
};

struct ToyBlockWeights {
    ProjectionSet cross;
    Tensor cross_out;  // d × d_model
    Tensor self_query;
    Tensor self_key;
    Tensor self_value;
    Tensor self_out;
};

struct ToyWeights {
    Tensor input;   // channels × d_model
    std::vector<ToyBlockWeights> blocks;
    Tensor output;  // d_model × channels

    static ToyWeights random(const ToyDenoiserConfig& config);
    static ToyWeights zeros(const ToyDenoiserConfig& config);
};

// Sinusoidal embedding of the countdown timestep, width d_model.
std::vector<double> timestep_embedding(int timestep, std::size_t d_model);

/// Deterministic epsilon predictor:
///   tokens = z·W_in + temb(t)
///   per block: tokens += scene_inject(cross-attn)·W_o,
///              tokens += (self-attn | scene-sharing attn)·W_o
///   eps = z + tokens·W_out
class ToyDenoiser final : public Denoiser {
public:
    explicit ToyDenoiser(ToyDenoiserConfig config);
    ToyDenoiser(ToyDenoiserConfig config, ToyWeights weights);

    std::string tag() const override { return "toy"; }
    LatentGeometry geometry() const override { return config_.geometry; }
    std::size_t layer_count() const override { return config_.depth; }

    const ToyDenoiserConfig& config() const noexcept { return config_; }
    const ToyWeights& weights() const noexcept { return weights_; }

protected:
    DenoiseResult run(const DenoiseRequest& request) override;

private:
    ToyDenoiserConfig config_;
    ToyWeights weights_;
};

/// Latent (h×w×c) → RGB image of 8h×8w: fixed affine channel mix mapped to
/// [0, 255] around mid-gray, nearest-neighbour upsampled.
Image decode_latent(const Tensor& latent, const LatentGeometry& geometry);

}  // namespace storyscene
