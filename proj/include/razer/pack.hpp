// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "razer/grids.hpp"

namespace razer {

// Dense nibble layout: word j holds codes 8j..8j+7, code i occupies bits
// [4*(i mod 8), 4*(i mod 8)+3]. Unused trailing nibbles are zero.
struct PackedFp4Block {
    std::vector<std::uint32_t> words;
    std::size_t count = 0;
};

PackedFp4Block pack_fp4(std::span<const RzrCode> codes);
std::vector<RzrCode> unpack_fp4(const PackedFp4Block& block);

// Bit-plane layout for one 128-element group of 3-bit codes: bit i of each
// plane corresponds to element i. 48 bytes per group, zero waste.
struct Fp3Planes {
    std::array<std::uint64_t, 2> sign_plane{};    // code bit 0
    std::array<std::uint64_t, 2> exp_hi_plane{};  // code bit 2
    std::array<std::uint64_t, 2> exp_lo_plane{};  // code bit 1
};

inline constexpr std::size_t kFp3GroupSize = 128;

Fp3Planes pack_fp3(std::span<const RzrCode> codes);  // exactly 128 codes
std::vector<RzrCode> unpack_fp3(const Fp3Planes& planes);

inline RzrCode fp3_code_at(const Fp3Planes& p, std::size_t i) {
    const std::size_t w = i >> 6, b = i & 63;
    const auto s = static_cast<RzrCode>((p.sign_plane[w] >> b) & 1);
    const auto lo = static_cast<RzrCode>((p.exp_lo_plane[w] >> b) & 1);
    const auto hi = static_cast<RzrCode>((p.exp_hi_plane[w] >> b) & 1);
    return static_cast<RzrCode>((hi << 2) | (lo << 1) | s);
}

// Table-1 style per-operand cost: code bits plus amortized group metadata.
double effective_bits(double code_bits, double group_size, double scale_bits, double meta_bits);

}  // namespace razer
