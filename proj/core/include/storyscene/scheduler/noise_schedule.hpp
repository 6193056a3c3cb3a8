// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "storyscene/numerics/tensor.hpp"

namespace storyscene {

/// Training-time beta schedule plus the strided inference mapping.
///
/// Inference steps are addressed by a countdown index t in [1, T]; index t
/// maps to training step timesteps()[t - 1]. ᾱ at index 0 is defined as 1 so
/// the last update collapses onto the predicted clean latent.
class NoiseSchedule {
public:
    static NoiseSchedule linear(std::size_t inference_steps = 50, std::size_t train_steps = 1000,
                                double beta_start = 1e-4, double beta_end = 0.02);

    // Inference index t uses alphas_cumprod[t - 1] directly (T = size()).
    static NoiseSchedule from_alphas_cumprod(std::vector<double> alphas_cumprod);

    std::size_t steps() const noexcept { return timesteps_.size(); }
    double alpha_cumprod_at(int t) const;

    const std::vector<double>& betas() const noexcept { return betas_; }
    const std::vector<double>& alphas_cumprod() const noexcept { return alphas_cumprod_; }
    const std::vector<std::size_t>& timesteps() const noexcept { return timesteps_; }

private:
    std::vector<double> betas_;
    std::vector<double> alphas_cumprod_;
    std::vector<std::size_t> timesteps_;
};

/// η = 0 DDIM update on raw ᾱ values:
///   x0 = (z − √(1−ᾱ_t)·eps) / √ᾱ_t;  z' = √ᾱ_prev·x0 + √(1−ᾱ_prev)·eps
Tensor ddim_update(const Tensor& z, const Tensor& eps, double alpha_t, double alpha_prev);

// Step from countdown index t to t − 1. Throws IndexError unless 1 <= t <= T.
Tensor ddim_step(const Tensor& z, const Tensor& eps, int t, const NoiseSchedule& schedule);

}  // namespace storyscene
