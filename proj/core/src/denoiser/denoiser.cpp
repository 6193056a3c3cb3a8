// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#include "storyscene/denoiser/denoiser.hpp"

#include <string>

#include "storyscene/error.hpp"

namespace storyscene {

DenoiseResult Denoiser::predict_eps(const DenoiseRequest& request) {
    const std::size_t batch = request.members.size();
    if (batch == 0 || batch > 2) {
        rejected_.fetch_add(1);
        throw ContractError("denoiser accepts one or two latents per call, got " + std::to_string(batch));
    }
    if (request.sharing && batch != 2) {
        rejected_.fetch_add(1);
        throw ContractError("scene sharing requires exactly two latents");
    }
    if (request.scene == nullptr) throw ContractError("denoise request without scene binding");
    for (const auto& m : request.members) {
        if (m.latent == nullptr || m.prompt == nullptr) throw ContractError("incomplete denoise member");
    }

    invocations_.fetch_add(1);
    if (batch == 2) joint_invocations_.fetch_add(1);
    std::uint64_t seen = max_batch_.load();
    while (seen < batch && !max_batch_.compare_exchange_weak(seen, batch)) {
    }
    return run(request);
}

DenoiserCounters Denoiser::counters() const {
    return {invocations_.load(), joint_invocations_.load(), max_batch_.load(), rejected_.load()};
}

}  // namespace storyscene
