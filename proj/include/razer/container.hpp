// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "razer/quantize.hpp"

namespace razer {

// On-disk packed tensor (".rzr"), all integers little-endian:
//   magic "RZR1" | version u16 | dtype u8 | group_size u32 | ndim u8 |
//   dims u64*ndim | tail_len u32 | sv_table 4*f32 | scales u16/group |
//   sv_indices 2 bits/group (4 per byte) | zero_points u8/group (INT only) |
//   payload (FP4 nibble words or FP3 bit planes per group).
// Payload length is derivable from the header alone; read-then-write is
// byte-identical.
inline constexpr std::uint16_t kContainerVersion = 1;

std::vector<std::uint8_t> serialize_container(const QuantizedTensor& qt);
QuantizedTensor parse_container(std::span<const std::uint8_t> bytes);

void write_container(const QuantizedTensor& qt, const std::string& path);
QuantizedTensor read_container(const std::string& path);

// Minimal ".nt" tensor interchange:
//   magic "NTSR" | u8 dtype (0 = f32, 1 = f16) | u8 ndim | u64 dims... |
//   little-endian payload.
struct Tensor {
    std::vector<std::size_t> dims;
    std::vector<double> data;

    std::size_t numel() const {
        std::size_t n = 1;
        for (std::size_t d : dims) n *= d;
        return n;
    }
};

std::vector<std::uint8_t> serialize_nt(const Tensor& t, bool as_f16 = false);
Tensor parse_nt(std::span<const std::uint8_t> bytes);

void write_nt(const Tensor& t, const std::string& path, bool as_f16 = false);
Tensor read_nt(const std::string& path);

}  // namespace razer
