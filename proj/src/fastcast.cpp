// SPDX-License-Identifier: Apache-2.0
#include "razer/fastcast.hpp"

#include <cmath>
#include <stdexcept>

namespace razer {

SvHalfTable make_sv_half_table(const SVSet& sv) {
    SvHalfTable t;
    for (std::size_t i = 0; i < 4; ++i) t.entries[i] = half_encode(sv.values[i]);
    return t;
}

HalfBits razer4_to_half_lookup(RzrCode code, int sv_idx, const SvHalfTable& table) {
    const DatatypeSpec& spec = fp4_grid();
    std::array<HalfBits, 16> lut{};
    for (std::size_t i = 0; i < spec.grid.size(); ++i)
        lut[spec.codes[i]] = spec.grid[i] == 0.0 ? HalfBits{0} : half_encode(spec.grid[i]);
    lut[spec.sv_code] = table.entries[sv_idx];
    return lut[code & 0xF];
}

RzrCode encode_half_to_razer4(double grid_value) {
    const DatatypeSpec& spec = fp4_grid();
    for (std::size_t i = 0; i < spec.grid.size(); ++i) {
        if (spec.grid[i] == grid_value) return spec.codes[i];
    }
    throw std::invalid_argument("encode_half_to_razer4: value not on the FP4 grid");
}

std::vector<float> batch_cast(const PackedFp4Block& block, int sv_idx, const SvHalfTable& table,
                              float scale) {
    if (block.count > block.words.size() * 8) throw DataError("batch_cast: count/words mismatch");
    std::vector<float> out;
    out.reserve(block.count);
    for (std::size_t i = 0; i < block.count; ++i) {
        const auto code = static_cast<RzrCode>((block.words[i / 8] >> (4 * (i % 8))) & 0xF);
        out.push_back(half_to_float(razer4_to_half_fast(code, sv_idx, table)) * scale);
    }
    return out;
}

HalfBits razer3_to_half(const Fp3Planes& planes, std::size_t index, const SvHalfTable& table,
                        int sv_idx) {
    if (index >= kFp3GroupSize) throw std::out_of_range("razer3_to_half: index out of range");
    const DatatypeSpec& spec = fp3_grid();
    std::array<HalfBits, 8> lut{};
    for (std::size_t i = 0; i < spec.grid.size(); ++i)
        lut[spec.codes[i]] = spec.grid[i] == 0.0 ? HalfBits{0} : half_encode(spec.grid[i]);
    lut[spec.sv_code] = table.entries[sv_idx];
    return lut[fp3_code_at(planes, index)];
}

float half_to_float(HalfBits h) {
    const int exp = (h >> 10) & 0x1F;
    const int mant = h & 0x3FF;
    const float sign = (h & 0x8000u) ? -1.0f : 1.0f;
    if (exp == 0x1F) throw DataError("half_to_float: NaN/Inf pattern");
    if (exp == 0) return sign * std::ldexp(static_cast<float>(mant), -24);
    return sign * std::ldexp(static_cast<float>(1024 + mant), exp - 25);
}

}  // namespace razer
