// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "storyscene/attention/subject_mask.hpp"
#include "storyscene/numerics/ops.hpp"
#include "storyscene/numerics/tensor.hpp"

namespace storyscene {

/// Scaled dot-product attention softmax(q·kᵀ/√d)·v with d = q.cols().
Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v);

/// Splits q/k/v column-wise into `heads` equal slices, attends per head
/// and concatenates the results.
Tensor multi_head_attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t heads);

std::vector<Tensor> split_heads(const Tensor& x, std::size_t heads);

// Weights for the decoupled cross-attention block: a text path (K_c, V_c)
// and a scene path (K'_c, V'_c) sharing one query projection.
struct ProjectionSet {
    Tensor query;        // d_model × d
    Tensor text_key;     // d_model × d
    Tensor text_value;   // d_model × d
    Tensor scene_key;    // d_model × d
    Tensor scene_value;  // d_model × d
    std::size_t heads = 1;

    std::size_t model_width() const { return query.rows(); }
    std::size_t inner_width() const { return query.cols(); }
    std::size_t head_dim() const { return inner_width() / heads; }

    // Throws DimensionError unless every matrix is d_model × d and d divides by heads.
    void validate() const;
};

struct CrossAttentionMaps {
    // One entry per head; each map is hw × L (text) or hw × L' (scene).
    std::vector<Tensor> text;
    std::vector<Tensor> scene;
    // Per-head projected values: L × d_head and L' × d_head.
    std::vector<Tensor> text_values;
    std::vector<Tensor> scene_values;

    // Head-averaged text map, the quantity tracked across steps.
    Tensor mean_text_map() const;
};

CrossAttentionMaps cross_attention_maps(const Tensor& latent_tokens, const Tensor& text_tokens,
                                        const Tensor& scene_tokens, const ProjectionSet& proj);

/// A_c·V_c + λ·(1 − M)·A'_c·V'_c, with (1 − M) broadcast over features.
Tensor scene_inject(const Tensor& text_map, const Tensor& text_values, const Tensor& scene_map,
                    const Tensor& scene_values, const SubjectMask& mask, double lambda);

/// Applies scene_inject head by head and concatenates the head outputs.
Tensor scene_inject(const CrossAttentionMaps& maps, const SubjectMask& mask, double lambda);

/// Running sum of text cross-attention maps over denoising steps.
class CrossAttentionState {
public:
    void accumulate(const Tensor& map);
    Tensor average() const;

    const Tensor& running_sum() const noexcept { return running_sum_; }
    std::size_t step_count() const noexcept { return step_count_; }

    // Test hook for the scale-invariance property.
    static CrossAttentionState from_sum(Tensor running_sum, std::size_t step_count);

private:
    Tensor running_sum_;
    std::size_t step_count_ = 0;
};

struct ThresholdPolicy {
    enum class Kind { mean, fixed };
    Kind kind = Kind::mean;
    double tau = 0.5;

    static ThresholdPolicy mean() { return {}; }
    static ThresholdPolicy fixed(double tau) { return {Kind::fixed, tau}; }
};

/// Binary subject mask from the subject token's column of the averaged
/// text map: min-max normalize, then value >= threshold → 1.
SubjectMask derive_subject_mask(const CrossAttentionState& state, std::size_t subject_token_index,
                                std::size_t height, std::size_t width,
                                ThresholdPolicy policy = ThresholdPolicy::mean());

struct AttentionBranch {
    Tensor query;
    Tensor key;
    Tensor value;
};

struct SceneSharingOptions {
    KvMaskMode mode = KvMaskMode::drop;
    // Gate foreign tokens by M̃ instead of (1 − M̃): share the subject, not the background.
    bool invert = false;
    std::size_t heads = 1;
};

/// Each branch attends over its own keys/values followed by the other
/// branch's keys/values gated by the other branch's mask.
std::pair<Tensor, Tensor> scene_sharing_attention(const AttentionBranch& a, const AttentionBranch& b,
                                                  const SubjectMask& mask_a, const SubjectMask& mask_b,
                                                  const SceneSharingOptions& options = {});

}  // namespace storyscene
