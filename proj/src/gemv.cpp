// SPDX-License-Identifier: Apache-2.0
#include "razer/gemv.hpp"

#include <stdexcept>

namespace razer {

std::size_t QuantizedMatrix::payload_bytes() const {
    std::size_t n = 0;
    for (const PackedFp4Block& b : payload) n += b.words.size() * 4;
    return n;
}

QuantizedMatrix quantize_matrix(std::span<const double> w, std::size_t rows, std::size_t cols,
                                int group_size, const SVSet& sv_set) {
    QuantConfig cfg;
    cfg.dtype = Dtype::Fp4Rzr;
    cfg.group_size = group_size;
    const QuantizedTensor qt = quantize_tensor(w, {rows, cols}, cfg, sv_set);

    QuantizedMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.group_size = group_size;
    m.sv_set = sv_set;
    m.tail_len = qt.tail_len;
    m.scales.reserve(qt.groups.size());
    m.sv_indices.reserve(qt.groups.size());
    m.payload.reserve(qt.groups.size());
    for (const QuantizedGroup& g : qt.groups) {
        const auto& p = std::get<RzrGroupParams>(g.params);
        m.scales.push_back(static_cast<float>(p.scale));
        m.sv_indices.push_back(static_cast<std::uint8_t>(p.sv_index));
        m.payload.push_back(pack_fp4(g.codes));
    }
    return m;
}

std::vector<float> dequantize_matrix(const QuantizedMatrix& wq) {
    const SvHalfTable table = make_sv_half_table(wq.sv_set);
    const auto g = static_cast<std::size_t>(wq.group_size);
    const std::size_t gpr = wq.groups_per_row();
    std::vector<float> out(wq.rows * wq.cols);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(wq.rows); ++r) {
        for (std::size_t c = 0; c < gpr; ++c) {
            const std::size_t gi = static_cast<std::size_t>(r) * gpr + c;
            const std::vector<float> vals =
                batch_cast(wq.payload[gi], wq.sv_indices[gi], table, wq.scales[gi]);
            const std::size_t base = c * g;
            const std::size_t len = std::min(g, wq.cols - base);
            for (std::size_t i = 0; i < len; ++i)
                out[static_cast<std::size_t>(r) * wq.cols + base + i] = vals[i];
        }
    }
    return out;
}

std::vector<float> gemv_fused(const QuantizedMatrix& wq, std::span<const float> x) {
    if (x.size() != wq.cols) throw std::invalid_argument("gemv_fused: dimension mismatch");
    const SvHalfTable table = make_sv_half_table(wq.sv_set);
    const auto g = static_cast<std::size_t>(wq.group_size);
    const std::size_t gpr = wq.groups_per_row();
    std::vector<float> y(wq.rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(wq.rows); ++r) {
        float acc = 0.0f;
        for (std::size_t c = 0; c < gpr; ++c) {
            const std::size_t gi = static_cast<std::size_t>(r) * gpr + c;
            const std::vector<float> vals =
                batch_cast(wq.payload[gi], wq.sv_indices[gi], table, wq.scales[gi]);
            const std::size_t base = c * g;
            const std::size_t len = std::min(g, wq.cols - base);
            for (std::size_t i = 0; i < len; ++i) acc += vals[i] * x[base + i];
        }
        y[static_cast<std::size_t>(r)] = acc;
    }
    return y;
}

std::vector<float> gemv_reference(std::span<const float> w, std::size_t rows, std::size_t cols,
                                  std::span<const float> x) {
    if (w.size() != rows * cols || x.size() != cols)
        throw std::invalid_argument("gemv_reference: dimension mismatch");
    std::vector<float> y(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        float acc = 0.0f;
        for (std::size_t k = 0; k < cols; ++k) acc += w[r * cols + k] * x[k];
        y[r] = acc;
    }
    return y;
}

}  // namespace razer
