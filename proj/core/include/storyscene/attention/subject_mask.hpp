// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace storyscene {

/// Per-spatial-token scalar field in [0, 1], stored row-major over an
/// h×w grid. A value of 1 marks the subject, 0 the background.
class SubjectMask {
public:
    SubjectMask() = default;
    SubjectMask(std::size_t height, std::size_t width, std::vector<double> values);

    static SubjectMask zeros(std::size_t height, std::size_t width);
    static SubjectMask ones(std::size_t height, std::size_t width);

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t size() const noexcept { return values_.size(); }

    double operator()(std::size_t y, std::size_t x) const { return values_[y * width_ + x]; }
    std::span<const double> values() const noexcept { return values_; }

    // Nearest-neighbour rescale; returns *this unchanged at the same grid.
    SubjectMask resized(std::size_t height, std::size_t width) const;
    SubjectMask complement() const;
    std::size_t active_count() const;

    friend bool operator==(const SubjectMask&, const SubjectMask&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<double> values_;
};

}  // namespace storyscene
