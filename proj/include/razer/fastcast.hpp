// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "razer/grids.hpp"
#include "razer/half.hpp"
#include "razer/pack.hpp"
#include "razer/svset.hpp"

namespace razer {

// Half encodings of the four active special values.
struct SvHalfTable {
    std::array<HalfBits, 4> entries;
};

SvHalfTable make_sv_half_table(const SVSet& sv);

// The default table: {5.0, 8.0, -5.0, -8.0}.
inline SvHalfTable default_sv_half_table() {
    return SvHalfTable{{0x4500, 0x4800, 0xC500, 0xC800}};
}

// Branch-free RaZeR-FP4 -> half cast. Moves the sign (code LSB) to bit 15,
// rebases the {E, M} field into the half exponent, then selects between the
// rebased value, zero, and the special-value table entry by comparing in the
// half domain.
inline HalfBits razer4_to_half_fast(RzrCode code, int sv_idx, const SvHalfTable& table) {
    const auto sign = static_cast<HalfBits>(static_cast<unsigned>(code) << 15);
    const auto em = static_cast<HalfBits>((0x38u + (code & 0xEu)) << 8);
    const auto v = static_cast<HalfBits>(sign | em);
    HalfBits out = v == 0xBA00 ? table.entries[sv_idx] : v;
    out = v == 0x3A00 ? HalfBits{0} : out;
    return out;
}

// 16-way lookup baseline with identical semantics; the fast path's oracle.
HalfBits razer4_to_half_lookup(RzrCode code, int sv_idx, const SvHalfTable& table);

// Inverse direction: FP4 grid value -> code, plus the reserved sv code.
inline constexpr RzrCode kRzr4SvCode = kFp4SvCode;
RzrCode encode_half_to_razer4(double grid_value);  // throws on non-grid values

// Unpack, fast-cast, and scale one packed group; accumulation-ready floats.
std::vector<float> batch_cast(const PackedFp4Block& block, int sv_idx, const SvHalfTable& table,
                              float scale);

// FP3 plane decode via an 8-entry table over {0, +-1, +-2, +-4, sv}.
HalfBits razer3_to_half(const Fp3Planes& planes, std::size_t index, const SvHalfTable& table,
                        int sv_idx);

float half_to_float(HalfBits h);

}  // namespace razer
