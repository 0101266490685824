// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace razer {

struct BenchRow {
    std::size_t rows;
    std::size_t cols;
    std::string path;  // "fused" or "reference"
    std::uint64_t median_ns;
    std::size_t payload_bytes;   // packed 4-bit codes
    std::size_t baseline_bytes;  // half-precision equivalent
};

// Times the OpenMP fused path against the serial reference on random
// matrices; self-checks that both produce identical outputs before timing.
std::vector<BenchRow> bench_gemv(const std::vector<std::pair<std::size_t, std::size_t>>& shapes,
                                 int reps, int group_size = 128, std::uint64_t seed = 0);

std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace razer
