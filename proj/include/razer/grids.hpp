// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace razer {

// 4-bit RaZeR code in {E, M, S} bit order (sign in the LSB); 3-bit codes
// use {E, S}. One code (the remapped negative zero) is reserved for the
// per-group special value.
using RzrCode = std::uint8_t;

inline constexpr RzrCode kFp4SvCode = 0b0011;
inline constexpr RzrCode kFp4ZeroCode = 0b0010;
inline constexpr RzrCode kFp3SvCode = 0b001;
inline constexpr RzrCode kFp3ZeroCode = 0b000;

// A named quantization grid: ordered representable values plus the
// grid-index <-> binary-code bijection. RaZeR variants reserve exactly one
// code for the special value.
struct DatatypeSpec {
    std::string name;
    std::vector<double> grid;    // strictly increasing, contains 0 once
    std::vector<RzrCode> codes;  // codes[i] encodes grid[i]
    int bits = 4;
    bool has_sv = false;         // one reserved code remaps negative zero
    RzrCode sv_code = 0;

    double max_positive() const { return grid.back(); }
    double min_negative() const { return grid.front(); }
};

// Modified RaZeR FP4 (E2M1) grid: {0, ±0.5, ±1, ±1.5, ±2, ±3, ±4, ±6},
// code 0b0011 reserved for the special value.
const DatatypeSpec& fp4_grid();

// RaZeR FP3 (E2M0, exponent bias 1, subnormal = 0): {0, ±1, ±2, ±4},
// code 0b001 reserved.
const DatatypeSpec& fp3_grid();

// Plain integer code grids {0 .. 2^n - 1} with identity code assignment.
const DatatypeSpec& int_grid(int bits);

// Index and value of the grid entry minimizing |x - v|; ties break toward
// the value of smaller absolute magnitude. Grid must be sorted, nonempty.
struct NearestHit {
    std::size_t index;
    double value;
};
NearestHit nearest_grid_value(double x, const std::vector<double>& grid);

}  // namespace razer
