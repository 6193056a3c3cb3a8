// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "storyscene/numerics/tensor.hpp"

namespace storyscene {

Tensor matmul(const Tensor& a, const Tensor& b);
// a · bᵀ without materializing the transpose.
Tensor matmul_transposed(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

/// Row-wise softmax with per-row max subtraction. Non-finite input is
/// rejected with NumericError.
Tensor softmax_rows(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor hadamard(const Tensor& a, const Tensor& b);
// Multiplies row r by factors[r].
Tensor scale_rows(const Tensor& a, std::span<const double> factors);
// Adds `bias` to every row.
Tensor add_row(const Tensor& a, std::span<const double> bias);

void add_inplace(Tensor& acc, const Tensor& b);

// Stacks along the first axis; all other extents must agree.
Tensor concat_rows(const Tensor& top, const Tensor& bottom);
// Columns [begin, end) of a rank-2 tensor, and the inverse assembly.
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor column(const Tensor& a, std::size_t c);

double sum(const Tensor& a);
std::vector<double> row_sums(const Tensor& a);
double max_abs_diff(const Tensor& a, const Tensor& b);

enum class KvMaskMode { zero, drop };

/// Appends the rows of `other` after `own`, gated by a per-token mask.
///
/// zero: every row of `other` is scaled by (1 - mask[i]).
/// drop: rows with mask[i] >= 0.5 are omitted entirely, so they receive no
///       softmax weight downstream.
Tensor masked_concat_kv(const Tensor& own, const Tensor& other, std::span<const double> mask,
                        KvMaskMode mode);

}  // namespace storyscene
