// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace storyscene {

// 8-bit interleaved image (RGB unless stated otherwise).
struct Image {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t channels = 3;
    std::vector<std::uint8_t> pixels;

    Image() = default;
    Image(std::size_t w, std::size_t h, std::size_t c = 3, std::uint8_t fill = 0)
        : width(w), height(h), channels(c), pixels(w * h * c, fill) {}

    std::uint8_t& at(std::size_t x, std::size_t y, std::size_t c) {
        return pixels[(y * width + x) * channels + c];
    }
    std::uint8_t at(std::size_t x, std::size_t y, std::size_t c) const {
        return pixels[(y * width + x) * channels + c];
    }

    friend bool operator==(const Image&, const Image&) = default;
};

Image resize_nearest(const Image& src, std::size_t width, std::size_t height);

// Pixels [x1, x2) × [y1, y2); the rectangle must lie inside the image.
Image crop_image(const Image& src, std::size_t x1, std::size_t y1, std::size_t x2, std::size_t y2);

// Smooth seeded pattern used by the offline image generators.
Image procedural_image(std::uint64_t seed, std::size_t width, std::size_t height);

// Horizontal/vertical gradient with pixel (x, y) = (x % 256, y % 256, (x + y) % 256).
Image gradient_image(std::size_t width, std::size_t height);

std::vector<std::uint8_t> encode_png(const Image& image);
Image decode_png(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace storyscene
