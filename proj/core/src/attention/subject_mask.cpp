// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#include "storyscene/attention/subject_mask.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "storyscene/error.hpp"

namespace storyscene {

SubjectMask::SubjectMask(std::size_t height, std::size_t width, std::vector<double> values)
    : height_(height), width_(width), values_(std::move(values)) {
    if (values_.size() != height_ * width_) {
        throw DimensionError("subject mask: " + std::to_string(values_.size()) + " values for a " +
                             std::to_string(height_) + "x" + std::to_string(width_) + " grid");
    }
    for (double v : values_) {
        if (!(v >= 0.0 && v <= 1.0)) throw InputError("subject mask value outside [0, 1]");
    }
}

SubjectMask SubjectMask::zeros(std::size_t height, std::size_t width) {
    return SubjectMask(height, width, std::vector<double>(height * width, 0.0));
}

SubjectMask SubjectMask::ones(std::size_t height, std::size_t width) {
    return SubjectMask(height, width, std::vector<double>(height * width, 1.0));
}

SubjectMask SubjectMask::resized(std::size_t height, std::size_t width) const {
    if (height == height_ && width == width_) return *this;
    if (height_ == 0 || width_ == 0) throw DimensionError("cannot resize an empty mask");
    std::vector<double> out(height * width);
    for (std::size_t y = 0; y < height; ++y) {
        const std::size_t sy = std::min(height_ - 1, y * height_ / height);
        for (std::size_t x = 0; x < width; ++x) {
            const std::size_t sx = std::min(width_ - 1, x * width_ / width);
            out[y * width + x] = values_[sy * width_ + sx];
        }
    }
    return SubjectMask(height, width, std::move(out));
}

SubjectMask SubjectMask::complement() const {
    std::vector<double> out(values_.size());
    std::transform(values_.begin(), values_.end(), out.begin(), [](double v) { return 1.0 - v; });
    return SubjectMask(height_, width_, std::move(out));
}

std::size_t SubjectMask::active_count() const {
    return static_cast<std::size_t>(
        std::count_if(values_.begin(), values_.end(), [](double v) { return v >= 0.5; }));
}

}  // namespace storyscene
