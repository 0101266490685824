// SPDX-License-Identifier: Apache-2.0
#include "razer/pack.hpp"

#include <stdexcept>

#include "razer/half.hpp"

namespace razer {

PackedFp4Block pack_fp4(std::span<const RzrCode> codes) {
    PackedFp4Block block;
    block.count = codes.size();
    block.words.assign((codes.size() + 7) / 8, 0u);
    for (std::size_t i = 0; i < codes.size(); ++i)
        block.words[i / 8] |= static_cast<std::uint32_t>(codes[i] & 0xF) << (4 * (i % 8));
    return block;
}

std::vector<RzrCode> unpack_fp4(const PackedFp4Block& block) {
    if (block.count > block.words.size() * 8)
        throw DataError("unpack_fp4: count/words mismatch");
    std::vector<RzrCode> codes;
    codes.reserve(block.count);
    for (std::size_t i = 0; i < block.count; ++i)
        codes.push_back(static_cast<RzrCode>((block.words[i / 8] >> (4 * (i % 8))) & 0xF));
    return codes;
}

Fp3Planes pack_fp3(std::span<const RzrCode> codes) {
    if (codes.size() != kFp3GroupSize) throw DataError("pack_fp3: group size must be 128");
    Fp3Planes p;
    for (std::size_t i = 0; i < kFp3GroupSize; ++i) {
        const std::size_t w = i >> 6, b = i & 63;
        p.sign_plane[w] |= static_cast<std::uint64_t>(codes[i] & 1) << b;
        p.exp_lo_plane[w] |= static_cast<std::uint64_t>((codes[i] >> 1) & 1) << b;
        p.exp_hi_plane[w] |= static_cast<std::uint64_t>((codes[i] >> 2) & 1) << b;
    }
    return p;
}

std::vector<RzrCode> unpack_fp3(const Fp3Planes& planes) {
    std::vector<RzrCode> codes(kFp3GroupSize);
    for (std::size_t i = 0; i < kFp3GroupSize; ++i) codes[i] = fp3_code_at(planes, i);
    return codes;
}

double effective_bits(double code_bits, double group_size, double scale_bits, double meta_bits) {
    if (code_bits <= 0 || group_size <= 0 || scale_bits < 0 || meta_bits < 0)
        throw std::invalid_argument("effective_bits: non-positive argument");
    return code_bits + (scale_bits + meta_bits) / group_size;
}

}  // namespace razer
