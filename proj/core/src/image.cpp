// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#include "storyscene/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include "storyscene/error.hpp"

namespace storyscene {

Image resize_nearest(const Image& src, std::size_t width, std::size_t height) {
    if (src.width == 0 || src.height == 0) throw DimensionError("resize: empty source image");
    Image out(width, height, src.channels);
    for (std::size_t y = 0; y < height; ++y) {
        const std::size_t sy = std::min(src.height - 1, y * src.height / height);
        for (std::size_t x = 0; x < width; ++x) {
            const std::size_t sx = std::min(src.width - 1, x * src.width / width);
            for (std::size_t c = 0; c < src.channels; ++c) out.at(x, y, c) = src.at(sx, sy, c);
        }
    }
    return out;
}

Image crop_image(const Image& src, std::size_t x1, std::size_t y1, std::size_t x2, std::size_t y2) {
    if (x1 >= x2 || y1 >= y2 || x2 > src.width || y2 > src.height) {
        throw InternalError("crop rectangle outside image bounds");
    }
    Image out(x2 - x1, y2 - y1, src.channels);
    const std::size_t row_bytes = out.width * src.channels;
    for (std::size_t y = y1; y < y2; ++y) {
        const auto* from = src.pixels.data() + (y * src.width + x1) * src.channels;
        std::memcpy(out.pixels.data() + (y - y1) * row_bytes, from, row_bytes);
    }
    return out;
}

Image procedural_image(std::uint64_t seed, std::size_t width, std::size_t height) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    struct Wave { double fx, fy, phase, amp; };
    double base[3];
    Wave waves[3][3];
    for (int c = 0; c < 3; ++c) {
        base[c] = 60.0 + 130.0 * unit(rng);
        for (auto& w : waves[c]) {
            w = {1.0 + 5.0 * unit(rng), 1.0 + 5.0 * unit(rng), 6.283185307179586 * unit(rng),
                 15.0 + 25.0 * unit(rng)};
        }
    }
    Image img(width, height, 3);
    for (std::size_t y = 0; y < height; ++y) {
        const double v = static_cast<double>(y) / static_cast<double>(height);
        for (std::size_t x = 0; x < width; ++x) {
            const double u = static_cast<double>(x) / static_cast<double>(width);
            for (int c = 0; c < 3; ++c) {
                double val = base[c];
                for (const auto& w : waves[c]) {
                    val += w.amp * std::sin(6.283185307179586 * (w.fx * u + w.fy * v) + w.phase);
                }
                img.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(val), 0L, 255L));
            }
        }
    }
    return img;
}

Image gradient_image(std::size_t width, std::size_t height) {
    Image img(width, height, 3);
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) {
            img.at(x, y, 0) = static_cast<std::uint8_t>(x % 256);
            img.at(x, y, 1) = static_cast<std::uint8_t>(y % 256);
            img.at(x, y, 2) = static_cast<std::uint8_t>((x + y) % 256);
        }
    return img;
}

std::vector<std::uint8_t> encode_png(const Image& image) {
    if (image.pixels.size() != image.width * image.height * image.channels || image.width == 0 ||
        image.height == 0) {
        throw DimensionError("png: image buffer does not match its dimensions");
    }
    if (image.channels != 1 && image.channels != 3 && image.channels != 4) {
        throw InputError("png: unsupported channel count " + std::to_string(image.channels));
    }
    png_image desc;
    std::memset(&desc, 0, sizeof desc);
    desc.version = PNG_IMAGE_VERSION;
    desc.width = static_cast<png_uint_32>(image.width);
    desc.height = static_cast<png_uint_32>(image.height);
    desc.format = image.channels == 1 ? PNG_FORMAT_GRAY
                  : image.channels == 3 ? PNG_FORMAT_RGB
                                        : PNG_FORMAT_RGBA;

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&desc, nullptr, &size, 0, image.pixels.data(), 0, nullptr)) {
        throw InternalError(std::string("png encode failed: ") + desc.message);
    }
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&desc, out.data(), &size, 0, image.pixels.data(), 0, nullptr)) {
        throw InternalError(std::string("png encode failed: ") + desc.message);
    }
    out.resize(size);
    return out;
}

Image decode_png(std::span<const std::uint8_t> bytes) {
    png_image desc;
    std::memset(&desc, 0, sizeof desc);
    desc.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&desc, bytes.data(), bytes.size())) {
        throw InputError(std::string("png decode failed: ") + desc.message);
    }
    desc.format = PNG_FORMAT_RGB;
    Image img(desc.width, desc.height, 3);
    if (!png_image_finish_read(&desc, nullptr, img.pixels.data(), 0, nullptr)) {
        png_image_free(&desc);
        throw InputError(std::string("png decode failed: ") + desc.message);
    }
    return img;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + path);
    out << text;
}

}  // namespace storyscene
