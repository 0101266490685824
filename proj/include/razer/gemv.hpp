// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "razer/fastcast.hpp"
#include "razer/quantize.hpp"

namespace razer {

// RaZeR-FP4 packed weight matrix, grouped along K.
struct QuantizedMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    int group_size = 128;
    SVSet sv_set;
    std::vector<float> scales;        // one per group, row-major
    std::vector<std::uint8_t> sv_indices;
    std::vector<PackedFp4Block> payload;
    std::size_t tail_len = 0;

    std::size_t groups_per_row() const {
        const auto g = static_cast<std::size_t>(group_size);
        return (cols + g - 1) / g;
    }
    std::size_t payload_bytes() const;
};

QuantizedMatrix quantize_matrix(std::span<const double> w, std::size_t rows, std::size_t cols,
                                int group_size, const SVSet& sv_set);

// Dequantize the whole matrix (row-major floats), padding dropped.
std::vector<float> dequantize_matrix(const QuantizedMatrix& wq);

// Fused-dequantization GEMV: per row, batch-cast each group and
// multiply-accumulate in 32-bit float, strictly left to right. Rows are
// processed in parallel; the in-row order is fixed so the result is
// bit-identical to gemv_reference.
std::vector<float> gemv_fused(const QuantizedMatrix& wq, std::span<const float> x);

// Serial reference path over a plain row-major matrix, same accumulation
// order contract.
std::vector<float> gemv_reference(std::span<const float> w, std::size_t rows, std::size_t cols,
                                  std::span<const float> x);

}  // namespace razer
