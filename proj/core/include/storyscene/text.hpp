// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace storyscene {

// Whitespace tokenization shared by the embedder and subject tagging, so a
// token index means the same thing in both places.
std::vector<std::string> split_words(std::string_view text);

// Lowercased token with leading/trailing punctuation removed.
std::string normalize_token(std::string_view token);

std::size_t word_count(std::string_view text);
std::string first_words(std::string_view text, std::size_t n);
std::string trim(std::string_view text);
std::string to_lower(std::string_view text);

}  // namespace storyscene
