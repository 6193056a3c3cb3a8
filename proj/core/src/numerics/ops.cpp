// Copyright (C) 2026 The storyscene authors
// SPDX-License-Identifier: Apache-2.0

#include "storyscene/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "storyscene/error.hpp"

namespace storyscene {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) throw DimensionError(std::string(op) + ": shape mismatch");
}

template <typename F>
Tensor zip(const Tensor& a, const Tensor& b, const char* op, F f) {
    require_same_shape(a, b, op);
    Tensor out(a.shape());
    for (std::size_t i = 0; i < a.numel(); ++i) out[i] = f(a[i], b[i]);
    return out;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    if (b.rows() != k) {
        throw DimensionError("matmul: inner extents " + std::to_string(k) + " and " +
                             std::to_string(b.rows()) + " differ");
    }
    Tensor out({m, n});
    for (std::size_t i = 0; i < m; ++i) {
        auto dst = out.row(i);
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = a.at(i, p);
            auto src = b.row(p);
            for (std::size_t j = 0; j < n; ++j) dst[j] += aip * src[j];
        }
    }
    return out;
}

Tensor matmul_transposed(const Tensor& a, const Tensor& b) {
    const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
    if (b.cols() != k) {
        throw DimensionError("matmul_transposed: inner extents " + std::to_string(k) + " and " +
                             std::to_string(b.cols()) + " differ");
    }
    Tensor out({m, n});
    for (std::size_t i = 0; i < m; ++i) {
        auto ai = a.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            auto bj = b.row(j);
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
            out.at(i, j) = acc;
        }
    }
    return out;
}

Tensor transpose(const Tensor& a) {
    const std::size_t m = a.rows(), n = a.cols();
    Tensor out({n, m});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out.at(j, i) = a.at(i, j);
    return out;
}

Tensor softmax_rows(const Tensor& a) {
    if (!a.all_finite()) throw NumericError("softmax_rows: non-finite input");
    const std::size_t m = a.rows(), n = a.cols();
    Tensor out({m, n});
    for (std::size_t i = 0; i < m; ++i) {
        auto src = a.row(i);
        auto dst = out.row(i);
        if (n == 0) continue;
        const double mx = *std::max_element(src.begin(), src.end());
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            dst[j] = std::exp(src[j] - mx);
            total += dst[j];
        }
        for (std::size_t j = 0; j < n; ++j) dst[j] /= total;
    }
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    return zip(a, b, "add", [](double x, double y) { return x + y; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return zip(a, b, "sub", [](double x, double y) { return x - y; });
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
    return zip(a, b, "hadamard", [](double x, double y) { return x * y; });
}

Tensor scale(const Tensor& a, double s) {
    Tensor out(a.shape());
    for (std::size_t i = 0; i < a.numel(); ++i) out[i] = a[i] * s;
    return out;
}

Tensor scale_rows(const Tensor& a, std::span<const double> factors) {
    if (factors.size() != a.rows()) throw DimensionError("scale_rows: factor count != rows");
    Tensor out = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (double& v : out.row(i)) v *= factors[i];
    return out;
}

Tensor add_row(const Tensor& a, std::span<const double> bias) {
    if (bias.size() != a.cols()) throw DimensionError("add_row: bias width != cols");
    Tensor out = a;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto r = out.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) r[j] += bias[j];
    }
    return out;
}

void add_inplace(Tensor& acc, const Tensor& b) {
    require_same_shape(acc, b, "add_inplace");
    for (std::size_t i = 0; i < acc.numel(); ++i) acc[i] += b[i];
}

Tensor concat_rows(const Tensor& top, const Tensor& bottom) {
    if (top.rank() == 0 || top.rank() != bottom.rank() ||
        !std::equal(top.shape().begin() + 1, top.shape().end(), bottom.shape().begin() + 1)) {
        throw DimensionError("concat_rows: trailing extents differ");
    }
    Shape shape = top.shape();
    shape[0] += bottom.shape()[0];
    std::vector<double> data(top.data());
    data.insert(data.end(), bottom.data().begin(), bottom.data().end());
    return Tensor(std::move(shape), std::move(data));
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end) {
    if (begin > end || end > a.cols()) throw IndexError("slice_cols: range out of bounds");
    Tensor out({a.rows(), end - begin});
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto src = a.row(i).subspan(begin, end - begin);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw DimensionError("concat_cols: no parts");
    const std::size_t m = parts.front().rows();
    std::size_t n = 0;
    for (const auto& p : parts) {
        if (p.rows() != m) throw DimensionError("concat_cols: row counts differ");
        n += p.cols();
    }
    Tensor out({m, n});
    for (std::size_t i = 0; i < m; ++i) {
        auto dst = out.row(i).begin();
        for (const auto& p : parts) dst = std::copy(p.row(i).begin(), p.row(i).end(), dst);
    }
    return out;
}

Tensor column(const Tensor& a, std::size_t c) {
    if (c >= a.cols()) throw IndexError("column index " + std::to_string(c) + " out of range");
    Tensor out({a.rows()});
    for (std::size_t i = 0; i < a.rows(); ++i) out[i] = a.at(i, c);
    return out;
}

double sum(const Tensor& a) {
    double s = 0.0;
    for (double v : a.values()) s += v;
    return s;
}

std::vector<double> row_sums(const Tensor& a) {
    std::vector<double> out(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (double v : a.row(i)) out[i] += v;
    return out;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

Tensor masked_concat_kv(const Tensor& own, const Tensor& other, std::span<const double> mask,
                        KvMaskMode mode) {
    if (mask.size() != other.rows()) {
        throw DimensionError("masked_concat_kv: mask length " + std::to_string(mask.size()) +
                             " != token count " + std::to_string(other.rows()));
    }
    if (own.cols() != other.cols()) throw DimensionError("masked_concat_kv: widths differ");

    const std::size_t d = own.cols();
    std::vector<double> data(own.data());
    std::size_t kept = 0;
    for (std::size_t i = 0; i < other.rows(); ++i) {
        auto src = other.row(i);
        if (mode == KvMaskMode::drop) {
            if (mask[i] >= 0.5) continue;
            data.insert(data.end(), src.begin(), src.end());
        } else {
            const double keep = 1.0 - mask[i];
            for (double v : src) data.push_back(v * keep);
        }
        ++kept;
    }
    return Tensor({own.rows() + kept, d}, std::move(data));
}

}  // namespace storyscene
