// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#include "storyscene/scheduler/noise_schedule.hpp"

#include <cmath>
#include <string>

#include "storyscene/error.hpp"

namespace storyscene {

NoiseSchedule NoiseSchedule::linear(std::size_t inference_steps, std::size_t train_steps,
                                    double beta_start, double beta_end) {
    if (inference_steps == 0 || train_steps < inference_steps) {
        throw ConfigError("noise schedule: need 1 <= inference steps <= training steps");
    }
    if (!(beta_start > 0.0) || !(beta_end > beta_start) || !(beta_end < 1.0)) {
        throw ConfigError("noise schedule: need 0 < beta_start < beta_end < 1");
    }
    NoiseSchedule s;
    s.betas_.resize(train_steps);
    s.alphas_cumprod_.resize(train_steps);
    double prod = 1.0;
    for (std::size_t i = 0; i < train_steps; ++i) {
        const double frac = train_steps == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(train_steps - 1);
        s.betas_[i] = beta_start + (beta_end - beta_start) * frac;
        prod *= 1.0 - s.betas_[i];
        s.alphas_cumprod_[i] = prod;
    }
    const std::size_t stride = train_steps / inference_steps;
    s.timesteps_.resize(inference_steps);
    for (std::size_t k = 0; k < inference_steps; ++k) s.timesteps_[k] = k * stride;
    return s;
}

NoiseSchedule NoiseSchedule::from_alphas_cumprod(std::vector<double> alphas_cumprod) {
    if (alphas_cumprod.empty()) throw ConfigError("noise schedule: empty alphas_cumprod");
    double prev = 1.0;
    NoiseSchedule s;
    for (std::size_t i = 0; i < alphas_cumprod.size(); ++i) {
        const double a = alphas_cumprod[i];
        if (!(a > 0.0 && a <= 1.0) || (i > 0 && !(a < prev))) {
            throw ConfigError("noise schedule: alphas_cumprod must be strictly decreasing in (0, 1]");
        }
        s.betas_.push_back(1.0 - a / prev);
        s.timesteps_.push_back(i);
        prev = a;
    }
    s.alphas_cumprod_ = std::move(alphas_cumprod);
    return s;
}

double NoiseSchedule::alpha_cumprod_at(int t) const {
    if (t < 0 || t > static_cast<int>(steps())) {
        throw IndexError("timestep " + std::to_string(t) + " outside [0, " + std::to_string(steps()) + "]");
    }
    if (t == 0) return 1.0;
    return alphas_cumprod_[timesteps_[static_cast<std::size_t>(t - 1)]];
}

Tensor ddim_update(const Tensor& z, const Tensor& eps, double alpha_t, double alpha_prev) {
    if (z.shape() != eps.shape()) throw DimensionError("ddim: latent and eps shapes differ");
    // Equal ᾱ is the identity for any eps; skip the round trip through x0.
    if (alpha_prev == alpha_t) return z;
    const double sqrt_a = std::sqrt(alpha_t);
    const double sqrt_1ma = std::sqrt(1.0 - alpha_t);
    const double sqrt_prev = std::sqrt(alpha_prev);
    const double sqrt_1mprev = std::sqrt(1.0 - alpha_prev);
    Tensor out(z.shape());
    for (std::size_t i = 0; i < z.numel(); ++i) {
        const double x0 = (z[i] - sqrt_1ma * eps[i]) / sqrt_a;
        out[i] = sqrt_prev * x0 + sqrt_1mprev * eps[i];
    }
    return out;
}

Tensor ddim_step(const Tensor& z, const Tensor& eps, int t, const NoiseSchedule& schedule) {
    if (t < 1 || t > static_cast<int>(schedule.steps())) {
        throw IndexError("ddim_step: timestep " + std::to_string(t) + " outside [1, " +
                         std::to_string(schedule.steps()) + "]");
    }
    return ddim_update(z, eps, schedule.alpha_cumprod_at(t), schedule.alpha_cumprod_at(t - 1));
}

}  // namespace storyscene
