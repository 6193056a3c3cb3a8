// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#include "storyscene/denoiser/bindings.hpp"

#include <cmath>
#include <random>
#include <set>
#include <unordered_map>

#include "storyscene/error.hpp"
#include "storyscene/hash.hpp"
#include "storyscene/text.hpp"

namespace storyscene {

namespace {

std::string hash_key(const std::string& raw) {
    std::string key = normalize_token(raw);
    return key.empty() ? raw : key;
}

void unit_gaussian_row(std::uint64_t seed, std::span<double> row) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double norm2 = 0.0;
    for (double& v : row) {
        v = normal(rng);
        norm2 += v * v;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& v : row) v *= inv;
}

}  // namespace

Tensor toy_embed(const std::string& text, std::size_t d_model) {
    const auto words = split_words(text);
    if (words.empty()) throw InputError("toy_embed: empty text");
    if (d_model == 0) throw DimensionError("toy_embed: d_model must be positive");
    Tensor out({words.size(), d_model});
    for (std::size_t i = 0; i < words.size(); ++i) {
        unit_gaussian_row(fnv1a64(hash_key(words[i])), out.row(i));
    }
    return out;
}

Tensor toy_embed_image(const Image& image, std::size_t d_model, std::size_t grid, std::uint64_t seed) {
    if (image.width < grid || image.height < grid || grid == 0) {
        throw DimensionError("toy_embed_image: image smaller than the token grid");
    }
    constexpr std::size_t kFeatures = 5;  // r, g, b, x, y
    Tensor features({grid * grid, kFeatures});
    for (std::size_t gy = 0; gy < grid; ++gy) {
        const std::size_t y0 = gy * image.height / grid, y1 = (gy + 1) * image.height / grid;
        for (std::size_t gx = 0; gx < grid; ++gx) {
            const std::size_t x0 = gx * image.width / grid, x1 = (gx + 1) * image.width / grid;
            double acc[3] = {0, 0, 0};
            for (std::size_t y = y0; y < y1; ++y)
                for (std::size_t x = x0; x < x1; ++x)
                    for (std::size_t c = 0; c < 3; ++c) acc[c] += image.at(x, y, c % image.channels);
            const double n = static_cast<double>((y1 - y0) * (x1 - x0));
            auto row = features.row(gy * grid + gx);
            for (std::size_t c = 0; c < 3; ++c) row[c] = acc[c] / n / 127.5 - 1.0;
            row[3] = (static_cast<double>(gx) + 0.5) / static_cast<double>(grid) * 2.0 - 1.0;
            row[4] = (static_cast<double>(gy) + 0.5) / static_cast<double>(grid) * 2.0 - 1.0;
        }
    }
    Tensor proj({kFeatures, d_model});
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(kFeatures)));
    for (double& v : proj.values()) v = normal(rng);

    Tensor out({grid * grid, d_model});
    for (std::size_t t = 0; t < grid * grid; ++t)
        for (std::size_t f = 0; f < kFeatures; ++f)
            for (std::size_t j = 0; j < d_model; ++j) out.at(t, j) += features.at(t, f) * proj.at(f, j);
    return out;
}

HashAudit audit_token_hashes(const std::vector<std::string>& texts) {
    std::set<std::string> vocab;
    for (const auto& text : texts)
        for (const auto& w : split_words(text)) vocab.insert(hash_key(w));

    std::unordered_map<std::uint64_t, std::size_t> buckets;
    for (const auto& token : vocab) ++buckets[fnv1a64(token)];

    HashAudit audit;
    audit.distinct_tokens = vocab.size();
    for (const auto& [hash, count] : buckets) {
        if (count > 1) audit.collisions += count;
    }
    return audit;
}

PromptBinding PromptBinding::from_text(const std::string& text, std::size_t subject_token_index,
                                       std::size_t d_model) {
    PromptBinding b{toy_embed(text, d_model), subject_token_index, text};
    if (subject_token_index >= b.tokens.rows()) {
        throw IndexError("subject token index " + std::to_string(subject_token_index) +
                         " out of range for prompt \"" + text + "\"");
    }
    return b;
}

SceneBinding SceneBinding::from_image(const Image& image, std::string source, std::size_t d_model,
                                      std::size_t grid) {
    return {toy_embed_image(image, d_model, grid), std::move(source)};
}

}  // namespace storyscene
