// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "storyscene/attention/subject_mask.hpp"
#include "storyscene/denoiser/bindings.hpp"
#include "storyscene/numerics/tensor.hpp"

namespace storyscene {

struct LatentGeometry {
    std::size_t height = 8;
    std::size_t width = 8;
    std::size_t channels = 4;

    std::size_t tokens() const { return height * width; }
    Shape shape() const { return {height, width, channels}; }
    friend bool operator==(const LatentGeometry&, const LatentGeometry&) = default;
};

struct DenoiseMember {
    const Tensor* latent = nullptr;
    const PromptBinding* prompt = nullptr;
    // One mask per attention layer; an empty vector means "no subject known yet".
    std::vector<SubjectMask> masks;
    std::size_t story = 0;
};

struct DenoiseRequest {
    int timestep = 0;
    std::span<const DenoiseMember> members;
    const SceneBinding* scene = nullptr;
    bool sharing = false;
};

struct DenoiseResult {
    std::vector<Tensor> eps;
    // text_maps[member][layer]: head-averaged hw × L text cross-attention map.
    std::vector<std::vector<Tensor>> text_maps;
};

struct DenoiserCounters {
    std::uint64_t invocations = 0;
    std::uint64_t joint_invocations = 0;
    std::uint64_t max_batch = 0;
    std::uint64_t rejected = 0;
};

/// Epsilon predictor. predict_eps enforces the one-or-two latent contract
/// and keeps instrumentation; implementations override run().
class Denoiser {
public:
    virtual ~Denoiser() = default;

    DenoiseResult predict_eps(const DenoiseRequest& request);

    virtual std::string tag() const = 0;
    virtual LatentGeometry geometry() const = 0;
    virtual std::size_t layer_count() const = 0;

    // Counters only grow; use a fresh handle for a fresh measurement.
    DenoiserCounters counters() const;

protected:
    virtual DenoiseResult run(const DenoiseRequest& request) = 0;

private:
    std::atomic<std::uint64_t> invocations_{0};
    std::atomic<std::uint64_t> joint_invocations_{0};
    std::atomic<std::uint64_t> max_batch_{0};
    std::atomic<std::uint64_t> rejected_{0};
};

}  // namespace storyscene
