// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>

namespace razer {

// IEEE binary16 bit pattern: sign(1) | exponent(5, bias 15) | mantissa(10).
using HalfBits = std::uint16_t;

// Thrown when container or tensor data is structurally invalid.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Nearest binary16 value, ties to even. Overflow clamps to the largest
// finite half (0x7BFF) instead of producing Inf.
HalfBits half_encode(double x);

// Exact value of a half pattern, including subnormals. NaN/Inf patterns
// signal corrupt data and are rejected.
double half_decode(HalfBits h);

inline bool half_is_finite(HalfBits h) { return (h & 0x7C00u) != 0x7C00u; }

}  // namespace razer
