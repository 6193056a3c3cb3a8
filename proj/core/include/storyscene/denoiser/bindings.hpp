// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "storyscene/image.hpp"
#include "storyscene/numerics/tensor.hpp"

namespace storyscene {

/// Hash-seeded unit-norm embedding per whitespace token. Tokens that
/// normalize to the same string (case, surrounding punctuation) share a row.
Tensor toy_embed(const std::string& text, std::size_t d_model);

/// Scene tokens: mean colour of each cell in a grid×grid partition plus the
/// cell position, projected by a fixed seeded matrix to d_model.
Tensor toy_embed_image(const Image& image, std::size_t d_model, std::size_t grid = 4,
                       std::uint64_t seed = 0x5ce9e7a11ULL);

struct HashAudit {
    std::size_t distinct_tokens = 0;
    std::size_t collisions = 0;

    double collision_rate() const {
        return distinct_tokens ? static_cast<double>(collisions) / static_cast<double>(distinct_tokens)
                               : 0.0;
    }
};

// Counts distinct normalized tokens whose 64-bit hash is shared with another token.
HashAudit audit_token_hashes(const std::vector<std::string>& texts);

struct PromptBinding {
    Tensor tokens;  // L × d_model
    std::size_t subject_token_index = 0;
    std::string text;

    static PromptBinding from_text(const std::string& text, std::size_t subject_token_index,
                                   std::size_t d_model);
};

struct SceneBinding {
    Tensor tokens;  // L' × d_model
    std::string source;

    static SceneBinding from_image(const Image& image, std::string source, std::size_t d_model,
                                   std::size_t grid = 4);
};

}  // namespace storyscene
