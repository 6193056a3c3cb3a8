// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#include "storyscene/attention/attention.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "storyscene/error.hpp"

namespace storyscene {

Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v) {
    if (q.cols() != k.cols()) throw DimensionError("attention: query/key widths differ");
    if (k.rows() != v.rows()) throw DimensionError("attention: key/value token counts differ");
    if (q.cols() == 0) throw DimensionError("attention: zero head dimension");
    Tensor logits = scale(matmul_transposed(q, k), 1.0 / std::sqrt(static_cast<double>(q.cols())));
    return matmul(softmax_rows(logits), v);
}

std::vector<Tensor> split_heads(const Tensor& x, std::size_t heads) {
    if (heads == 0 || x.cols() % heads != 0) {
        throw DimensionError("width " + std::to_string(x.cols()) + " not divisible into " +
                             std::to_string(heads) + " heads");
    }
    if (heads == 1) return {x};
    const std::size_t dh = x.cols() / heads;
    std::vector<Tensor> out;
    out.reserve(heads);
    for (std::size_t h = 0; h < heads; ++h) out.push_back(slice_cols(x, h * dh, (h + 1) * dh));
    return out;
}

Tensor multi_head_attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t heads) {
    if (heads == 1) return attention(q, k, v);
    auto qs = split_heads(q, heads);
    auto ks = split_heads(k, heads);
    auto vs = split_heads(v, heads);
    std::vector<Tensor> outs;
    outs.reserve(heads);
    for (std::size_t h = 0; h < heads; ++h) outs.push_back(attention(qs[h], ks[h], vs[h]));
    return concat_cols(outs);
}

void ProjectionSet::validate() const {
    const std::size_t dm = query.rows();
    const std::size_t d = query.cols();
    for (const Tensor* w : {&text_key, &text_value, &scene_key, &scene_value}) {
        if (w->rows() != dm || w->cols() != d) {
            throw DimensionError("projection set: all matrices must be d_model x d");
        }
    }
    if (d == 0 || heads == 0 || d % heads != 0) {
        throw DimensionError("projection set: inner width must be a positive multiple of heads");
    }
}

Tensor CrossAttentionMaps::mean_text_map() const {
    if (text.empty()) throw PreconditionError("no attention maps");
    if (text.size() == 1) return text.front();
    Tensor acc = text.front();
    for (std::size_t h = 1; h < text.size(); ++h) add_inplace(acc, text[h]);
    return scale(acc, 1.0 / static_cast<double>(text.size()));
}

CrossAttentionMaps cross_attention_maps(const Tensor& latent_tokens, const Tensor& text_tokens,
                                        const Tensor& scene_tokens, const ProjectionSet& proj) {
    proj.validate();
    const std::size_t dm = proj.model_width();
    if (latent_tokens.cols() != dm || text_tokens.cols() != dm || scene_tokens.cols() != dm) {
        throw DimensionError("cross attention: token width does not match projection input width " +
                             std::to_string(dm));
    }
    const auto qs = split_heads(matmul(latent_tokens, proj.query), proj.heads);
    const auto kt = split_heads(matmul(text_tokens, proj.text_key), proj.heads);
    const auto ks = split_heads(matmul(scene_tokens, proj.scene_key), proj.heads);
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(proj.head_dim()));

    CrossAttentionMaps maps;
    maps.text_values = split_heads(matmul(text_tokens, proj.text_value), proj.heads);
    maps.scene_values = split_heads(matmul(scene_tokens, proj.scene_value), proj.heads);
    for (std::size_t h = 0; h < proj.heads; ++h) {
        maps.text.push_back(softmax_rows(scale(matmul_transposed(qs[h], kt[h]), inv_sqrt_d)));
        maps.scene.push_back(softmax_rows(scale(matmul_transposed(qs[h], ks[h]), inv_sqrt_d)));
    }
    return maps;
}

Tensor scene_inject(const Tensor& text_map, const Tensor& text_values, const Tensor& scene_map,
                    const Tensor& scene_values, const SubjectMask& mask, double lambda) {
    if (!(lambda >= 0.0)) throw PreconditionError("scene_inject: lambda must be >= 0");
    const Tensor text_out = matmul(text_map, text_values);
    const Tensor scene_out = matmul(scene_map, scene_values);
    if (text_out.shape() != scene_out.shape()) throw DimensionError("scene_inject: branch shapes differ");
    if (mask.size() != text_out.rows()) {
        throw DimensionError("scene_inject: mask has " + std::to_string(mask.size()) +
                             " cells for " + std::to_string(text_out.rows()) + " tokens");
    }
    Tensor out = text_out;
    const auto m = mask.values();
    for (std::size_t i = 0; i < out.rows(); ++i) {
        const double gate = lambda * (1.0 - m[i]);
        auto dst = out.row(i);
        auto src = scene_out.row(i);
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += gate * src[j];
    }
    return out;
}

Tensor scene_inject(const CrossAttentionMaps& maps, const SubjectMask& mask, double lambda) {
    std::vector<Tensor> heads;
    heads.reserve(maps.text.size());
    for (std::size_t h = 0; h < maps.text.size(); ++h) {
        heads.push_back(scene_inject(maps.text[h], maps.text_values[h], maps.scene[h],
                                     maps.scene_values[h], mask, lambda));
    }
    return heads.size() == 1 ? heads.front() : concat_cols(heads);
}

void CrossAttentionState::accumulate(const Tensor& map) {
    if (step_count_ == 0) {
        running_sum_ = map;
    } else {
        add_inplace(running_sum_, map);
    }
    ++step_count_;
}

Tensor CrossAttentionState::average() const {
    if (step_count_ == 0) throw PreconditionError("cross-attention state is empty");
    return scale(running_sum_, 1.0 / static_cast<double>(step_count_));
}

CrossAttentionState CrossAttentionState::from_sum(Tensor running_sum, std::size_t step_count) {
    CrossAttentionState s;
    s.running_sum_ = std::move(running_sum);
    s.step_count_ = step_count;
    return s;
}

SubjectMask derive_subject_mask(const CrossAttentionState& state, std::size_t subject_token_index,
                                std::size_t height, std::size_t width, ThresholdPolicy policy) {
    if (state.step_count() == 0) throw PreconditionError("derive_subject_mask: no steps accumulated");
    const Tensor& sum_map = state.running_sum();
    if (subject_token_index >= sum_map.cols()) {
        throw IndexError("subject token index " + std::to_string(subject_token_index) +
                         " out of range for " + std::to_string(sum_map.cols()) + " tokens");
    }
    if (sum_map.rows() != height * width) {
        throw DimensionError("derive_subject_mask: map has " + std::to_string(sum_map.rows()) +
                             " rows for a " + std::to_string(height) + "x" + std::to_string(width) +
                             " grid");
    }
    const double inv_steps = 1.0 / static_cast<double>(state.step_count());
    std::vector<double> col(sum_map.rows());
    for (std::size_t i = 0; i < col.size(); ++i) col[i] = sum_map.at(i, subject_token_index) * inv_steps;

    const auto [lo_it, hi_it] = std::minmax_element(col.begin(), col.end());
    const double lo = *lo_it;
    const double range = *hi_it - lo;
    for (double& v : col) v = range > 0.0 ? (v - lo) / range : 0.0;

    double threshold = policy.tau;
    if (policy.kind == ThresholdPolicy::Kind::mean) {
        double s = 0.0;
        for (double v : col) s += v;
        threshold = s / static_cast<double>(col.size());
        // A constant column normalizes to all zeros; its mean must tie exactly.
        if (range == 0.0) threshold = 0.0;
    }
    for (double& v : col) v = v >= threshold ? 1.0 : 0.0;
    return SubjectMask(height, width, std::move(col));
}

namespace {

Tensor shared_branch(const AttentionBranch& self, const AttentionBranch& foreign,
                     const SubjectMask& foreign_mask, const SceneSharingOptions& options) {
    if (foreign_mask.size() != foreign.key.rows()) {
        throw DimensionError("scene sharing: mask has " + std::to_string(foreign_mask.size()) +
                             " cells for " + std::to_string(foreign.key.rows()) + " foreign tokens");
    }
    const SubjectMask gate = options.invert ? foreign_mask.complement() : foreign_mask;
    const Tensor k = masked_concat_kv(self.key, foreign.key, gate.values(), options.mode);
    const Tensor v = masked_concat_kv(self.value, foreign.value, gate.values(), options.mode);
    return multi_head_attention(self.query, k, v, options.heads);
}

}  // namespace

std::pair<Tensor, Tensor> scene_sharing_attention(const AttentionBranch& a, const AttentionBranch& b,
                                                  const SubjectMask& mask_a, const SubjectMask& mask_b,
                                                  const SceneSharingOptions& options) {
    if (a.query.cols() != b.query.cols() || a.key.cols() != b.key.cols() ||
        a.value.cols() != b.value.cols()) {
        throw DimensionError("scene sharing: branches must share head dimension");
    }
    return {shared_branch(a, b, mask_b, options), shared_branch(b, a, mask_a, options)};
}

}  // namespace storyscene
