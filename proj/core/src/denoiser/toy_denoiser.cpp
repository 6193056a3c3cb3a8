// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#include "storyscene/denoiser/toy_denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "storyscene/error.hpp"
#include "storyscene/hash.hpp"

namespace storyscene {

void ToyDenoiserConfig::validate() const {
    if (geometry.height == 0 || geometry.width == 0 || geometry.channels == 0) {
        throw ConfigError("latent geometry must be non-empty");
    }
    if (d_model == 0 || depth == 0 || heads == 0 || d_model % heads != 0) {
        throw ConfigError("d_model must be a positive multiple of heads; depth must be >= 1");
    }
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
}

namespace {

Tensor gaussian(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double stddev) {
    std::normal_distribution<double> normal(0.0, stddev);
    Tensor t({rows, cols});
    for (double& v : t.values()) v = normal(rng);
    return t;
}

}  // namespace

ToyWeights ToyWeights::random(const ToyDenoiserConfig& config) {
    config.validate();
    const std::size_t c = config.geometry.channels;
    const std::size_t dm = config.d_model;
    const double s = 1.0 / std::sqrt(static_cast<double>(dm));
    std::mt19937_64 rng(derive_seed(config.seed, 0x7079));

    ToyWeights w;
    w.input = gaussian(rng, c, dm, 1.0 / std::sqrt(static_cast<double>(c)));
    for (std::size_t b = 0; b < config.depth; ++b) {
        ToyBlockWeights blk;
        blk.cross.query = gaussian(rng, dm, dm, s);
        blk.cross.text_key = gaussian(rng, dm, dm, s);
        blk.cross.text_value = gaussian(rng, dm, dm, s);
        blk.cross.scene_key = gaussian(rng, dm, dm, s);
        blk.cross.scene_value = gaussian(rng, dm, dm, s);
        blk.cross.heads = config.heads;
        blk.cross_out = gaussian(rng, dm, dm, s);
        blk.self_query = gaussian(rng, dm, dm, s);
        blk.self_key = gaussian(rng, dm, dm, s);
        blk.self_value = gaussian(rng, dm, dm, s);
        blk.self_out = gaussian(rng, dm, dm, s);
        w.blocks.push_back(std::move(blk));
    }
    w.output = gaussian(rng, dm, c, config.head_scale * s);
    return w;
}

ToyWeights ToyWeights::zeros(const ToyDenoiserConfig& config) {
    config.validate();
    const std::size_t c = config.geometry.channels;
    const std::size_t dm = config.d_model;
    ToyWeights w;
    w.input = Tensor({c, dm});
    for (std::size_t b = 0; b < config.depth; ++b) {
        ToyBlockWeights blk;
        for (Tensor* t : {&blk.cross.query, &blk.cross.text_key, &blk.cross.text_value,
                          &blk.cross.scene_key, &blk.cross.scene_value, &blk.cross_out,
                          &blk.self_query, &blk.self_key, &blk.self_value, &blk.self_out}) {
            *t = Tensor({dm, dm});
        }
        blk.cross.heads = config.heads;
        w.blocks.push_back(std::move(blk));
    }
    w.output = Tensor({dm, c});
    return w;
}

std::vector<double> timestep_embedding(int timestep, std::size_t d_model) {
    std::vector<double> e(d_model);
    const std::size_t half = (d_model + 1) / 2;
    for (std::size_t k = 0; k < half; ++k) {
        const double freq = std::pow(10000.0, -static_cast<double>(k) / static_cast<double>(half));
        const double arg = static_cast<double>(timestep) * freq;
        e[2 * k] = std::sin(arg);
        if (2 * k + 1 < d_model) e[2 * k + 1] = std::cos(arg);
    }
    return e;
}

ToyDenoiser::ToyDenoiser(ToyDenoiserConfig config)
    : config_(config), weights_(ToyWeights::random(config)) {}

ToyDenoiser::ToyDenoiser(ToyDenoiserConfig config, ToyWeights weights)
    : config_(config), weights_(std::move(weights)) {
    config_.validate();
    if (weights_.blocks.size() != config_.depth) throw ConfigError("weights depth != config depth");
    for (auto& b : weights_.blocks) {
        b.cross.heads = config_.heads;
        b.cross.validate();
    }
}

namespace {

const SubjectMask& layer_mask(const DenoiseMember& m, std::size_t layer, const LatentGeometry& g,
                              SubjectMask& scratch) {
    if (m.masks.empty()) {
        scratch = SubjectMask::zeros(g.height, g.width);
        return scratch;
    }
    const SubjectMask& src = m.masks[std::min(layer, m.masks.size() - 1)];
    if (src.height() == g.height && src.width() == g.width) return src;
    scratch = src.resized(g.height, g.width);
    return scratch;
}

}  // namespace

DenoiseResult ToyDenoiser::run(const DenoiseRequest& request) {
    const LatentGeometry& g = config_.geometry;
    const std::size_t n = request.members.size();
    const Tensor& scene_tokens = request.scene->tokens;

    std::vector<Tensor> hidden(n);
    std::vector<Tensor> latent_tokens(n);
    const auto temb = timestep_embedding(request.timestep, config_.d_model);
    for (std::size_t m = 0; m < n; ++m) {
        const Tensor& z = *request.members[m].latent;
        if (z.shape() != g.shape()) throw DimensionError("latent shape does not match denoiser geometry");
        latent_tokens[m] = z.reshaped({g.tokens(), g.channels});
        hidden[m] = add_row(matmul(latent_tokens[m], weights_.input), temb);
    }

    DenoiseResult result;
    result.text_maps.resize(n);
    std::vector<SubjectMask> scratch(n);
    for (std::size_t layer = 0; layer < weights_.blocks.size(); ++layer) {
        const ToyBlockWeights& blk = weights_.blocks[layer];
        std::vector<const SubjectMask*> masks(n);
        for (std::size_t m = 0; m < n; ++m) {
            masks[m] = &layer_mask(request.members[m], layer, g, scratch[m]);
            const CrossAttentionMaps maps =
                cross_attention_maps(hidden[m], request.members[m].prompt->tokens, scene_tokens, blk.cross);
            result.text_maps[m].push_back(maps.mean_text_map());
            add_inplace(hidden[m], matmul(scene_inject(maps, *masks[m], config_.lambda), blk.cross_out));
        }

        std::vector<AttentionBranch> branches(n);
        for (std::size_t m = 0; m < n; ++m) {
            branches[m] = {matmul(hidden[m], blk.self_query), matmul(hidden[m], blk.self_key),
                           matmul(hidden[m], blk.self_value)};
        }
        if (request.sharing) {
            SceneSharingOptions opts{config_.mask_mode, config_.invert_mask, config_.heads};
            auto [out_a, out_b] = scene_sharing_attention(branches[0], branches[1], *masks[0], *masks[1], opts);
            add_inplace(hidden[0], matmul(out_a, blk.self_out));
            add_inplace(hidden[1], matmul(out_b, blk.self_out));
        } else {
            for (std::size_t m = 0; m < n; ++m) {
                const auto& br = branches[m];
                add_inplace(hidden[m],
                            matmul(multi_head_attention(br.query, br.key, br.value, config_.heads), blk.self_out));
            }
        }
    }

    for (std::size_t m = 0; m < n; ++m) {
        Tensor eps = add(latent_tokens[m], matmul(hidden[m], weights_.output));
        if (!eps.all_finite()) throw NumericError("toy denoiser produced non-finite eps");
        result.eps.push_back(eps.reshaped(g.shape()));
    }
    return result;
}

Image decode_latent(const Tensor& latent, const LatentGeometry& g) {
    if (latent.shape() != g.shape()) throw DimensionError("decode: latent shape does not match geometry");
    // Approximate latent-to-RGB mixing used by SD-family previewers.
    static constexpr double kRgbFactors[4][3] = {
        {0.298, 0.207, 0.208}, {0.187, 0.286, 0.173}, {-0.158, 0.189, 0.264}, {-0.184, -0.271, -0.473}};
    constexpr std::size_t kScale = 8;
    Image img(g.width * kScale, g.height * kScale, 3);
    for (std::size_t y = 0; y < g.height; ++y) {
        for (std::size_t x = 0; x < g.width; ++x) {
            std::uint8_t rgb[3];
            for (std::size_t k = 0; k < 3; ++k) {
                double v = 0.0;
                if (g.channels == 4) {
                    for (std::size_t c = 0; c < 4; ++c) v += kRgbFactors[c][k] * latent[(y * g.width + x) * 4 + c];
                } else {
                    v = latent[(y * g.width + x) * g.channels + k % g.channels];
                }
                const double px = std::clamp(127.5 + 127.5 * v, 0.0, 255.0);
                rgb[k] = static_cast<std::uint8_t>(std::lround(px));
            }
            for (std::size_t dy = 0; dy < kScale; ++dy)
                for (std::size_t dx = 0; dx < kScale; ++dx)
                    for (std::size_t k = 0; k < 3; ++k) img.at(x * kScale + dx, y * kScale + dy, k) = rgb[k];
        }
    }
    return img;
}

}  // namespace storyscene
