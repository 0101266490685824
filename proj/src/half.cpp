// SPDX-License-Identifier: Apache-2.0
#include "razer/half.hpp"

#include <bit>
#include <cmath>

namespace razer {

HalfBits half_encode(double x) {
    const std::uint64_t db = std::bit_cast<std::uint64_t>(x);
    const HalfBits sign = static_cast<HalfBits>((db >> 48) & 0x8000u);
    const double a = std::fabs(x);
    if (a == 0.0) return sign;

    int exp = std::ilogb(a);
    if (exp < -14) {
        // Subnormal range: units of 2^-24, round to nearest even.
        const double units = std::rint(std::ldexp(a, 24));
        if (units >= 1024.0) return static_cast<HalfBits>(sign | 0x0400u);
        return static_cast<HalfBits>(sign | static_cast<HalfBits>(units));
    }
    // Normal: significand with implicit bit lands in [1024, 2048].
    double n = std::rint(std::ldexp(a, 10 - exp));
    if (n >= 2048.0) {
        n = 1024.0;
        ++exp;
    }
    if (exp > 15) return static_cast<HalfBits>(sign | 0x7BFFu);  // clamp, no Inf
    const auto mant = static_cast<HalfBits>(static_cast<int>(n) - 1024);
    return static_cast<HalfBits>(sign | static_cast<HalfBits>((exp + 15) << 10) | mant);
}

double half_decode(HalfBits h) {
    const int exp = (h >> 10) & 0x1F;
    const int mant = h & 0x3FF;
    if (exp == 0x1F) throw DataError("half_decode: NaN/Inf pattern");
    const double sign = (h & 0x8000u) ? -1.0 : 1.0;
    if (exp == 0) return sign * std::ldexp(static_cast<double>(mant), -24);
    return sign * std::ldexp(1024.0 + mant, exp - 25);
}

}  // namespace razer
