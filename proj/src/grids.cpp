// SPDX-License-Identifier: Apache-2.0
#include "razer/grids.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace razer {
namespace {

// FP4 value by its 3-bit {E, M} field. EM=001 is the zero / special slot.
constexpr double kFp4ByEm[8] = {0.5, 0.0, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0};

DatatypeSpec make_fp4() {
    DatatypeSpec spec;
    spec.name = "fp4rzr";
    spec.bits = 4;
    spec.has_sv = true;
    spec.sv_code = kFp4SvCode;
    struct Entry {
        double v;
        RzrCode c;
    };
    std::vector<Entry> entries;
    entries.push_back({0.0, kFp4ZeroCode});
    for (RzrCode em = 0; em < 8; ++em) {
        if (em == 1) continue;  // zero / sv slot handled above
        entries.push_back({kFp4ByEm[em], static_cast<RzrCode>(em << 1)});
        entries.push_back({-kFp4ByEm[em], static_cast<RzrCode>((em << 1) | 1)});
    }
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.v < b.v; });
    for (const Entry& e : entries) {
        spec.grid.push_back(e.v);
        spec.codes.push_back(e.c);
    }
    return spec;
}

DatatypeSpec make_fp3() {
    DatatypeSpec spec;
    spec.name = "fp3rzr";
    spec.bits = 3;
    spec.has_sv = true;
    spec.sv_code = kFp3SvCode;
    struct Entry {
        double v;
        RzrCode c;
    };
    std::vector<Entry> entries;
    entries.push_back({0.0, kFp3ZeroCode});
    for (RzrCode e = 1; e < 4; ++e) {
        const double v = std::ldexp(1.0, e - 1);  // 1, 2, 4
        entries.push_back({v, static_cast<RzrCode>(e << 1)});
        entries.push_back({-v, static_cast<RzrCode>((e << 1) | 1)});
    }
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.v < b.v; });
    for (const Entry& e : entries) {
        spec.grid.push_back(e.v);
        spec.codes.push_back(e.c);
    }
    return spec;
}

DatatypeSpec make_int(int bits) {
    DatatypeSpec spec;
    spec.name = bits == 4 ? "int4" : "int3";
    spec.bits = bits;
    for (int i = 0; i < (1 << bits); ++i) {
        spec.grid.push_back(static_cast<double>(i));
        spec.codes.push_back(static_cast<RzrCode>(i));
    }
    return spec;
}

}  // namespace

const DatatypeSpec& fp4_grid() {
    static const DatatypeSpec spec = make_fp4();
    return spec;
}

const DatatypeSpec& fp3_grid() {
    static const DatatypeSpec spec = make_fp3();
    return spec;
}

const DatatypeSpec& int_grid(int bits) {
    static const DatatypeSpec spec3 = make_int(3);
    static const DatatypeSpec spec4 = make_int(4);
    if (bits == 3) return spec3;
    if (bits == 4) return spec4;
    throw std::invalid_argument("int_grid: bits must be 3 or 4");
}

NearestHit nearest_grid_value(double x, const std::vector<double>& grid) {
    if (grid.empty()) throw std::invalid_argument("nearest_grid_value: empty grid");
    const auto it = std::lower_bound(grid.begin(), grid.end(), x);
    std::size_t best;
    if (it == grid.begin()) {
        best = 0;
    } else if (it == grid.end()) {
        best = grid.size() - 1;
    } else {
        const std::size_t hi = static_cast<std::size_t>(it - grid.begin());
        const std::size_t lo = hi - 1;
        const double dlo = x - grid[lo];
        const double dhi = grid[hi] - x;
        if (dlo < dhi) {
            best = lo;
        } else if (dhi < dlo) {
            best = hi;
        } else {
            best = std::fabs(grid[lo]) <= std::fabs(grid[hi]) ? lo : hi;
        }
    }
    return {best, grid[best]};
}

}  // namespace razer
