// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "razer/grids.hpp"
#include "razer/svset.hpp"

namespace razer {

enum class Dtype : std::uint8_t { Int4 = 0, Int3 = 1, Fp4Rzr = 2, Fp3Rzr = 3 };

enum class Metric { MSE, KL };

struct QuantConfig {
    Dtype dtype = Dtype::Fp4Rzr;
    int group_size = 128;
    double clip_alpha = 1.0;
    double clip_beta = 1.0;
    Metric metric = Metric::MSE;
};

struct IntGroupParams {
    double scale = 1.0;  // snapped to half precision
    int zero_point = 0;  // in [0, 2^bits - 1]
    int bits = 4;
};

struct RzrGroupParams {
    double scale = 1.0;  // snapped to half precision
    int sv_index = 0;    // addresses the active SVSet
};

struct QuantizedGroup {
    std::vector<RzrCode> codes;
    std::variant<IntGroupParams, RzrGroupParams> params;
};

struct QuantizedTensor {
    std::vector<std::size_t> dims;
    QuantConfig config;
    SVSet sv_set;  // meaningful for RaZeR dtypes only
    std::vector<QuantizedGroup> groups;
    std::size_t tail_len = 0;  // valid length of each row's final group

    std::size_t numel() const;
    std::size_t groups_per_row() const;
};

// Asymmetric integer quantization:
//   s = (alpha*max - beta*min) / (2^n - 1),  z = -round(beta*min / s),
//   codes = clamp(round(x/s) + z, 0, 2^n - 1).
// Constant groups use s = 1. Rounding is ties-to-even; z is clamped into
// the code range; s is snapped to half precision before coding.
QuantizedGroup quantize_group_int(std::span<const double> x, int bits, double alpha = 1.0,
                                  double beta = 1.0);
std::vector<double> dequantize_group_int(const QuantizedGroup& q);

// FP quantization with a two-sided absmax scale:
//   s = alpha * max(max(x,0)/G+, max(-x,0)/|G-|),  s = 1 for all-zero groups.
QuantizedGroup quantize_group_fp(std::span<const double> x, const DatatypeSpec& spec,
                                 double alpha = 1.0);

// RaZeR quantization: tries each of the 4 special values on the extended
// grid, keeps the one with the lowest MSE (ties to the lowest index).
// `valid_len` limits the MSE objective to a prefix (padding exclusion);
// 0 means the whole group.
QuantizedGroup quantize_group_razer(std::span<const double> x, const DatatypeSpec& spec,
                                    const SVSet& sv_set, double alpha = 1.0,
                                    std::size_t valid_len = 0);

// Dequantized values are computed as float(code value) * float(scale) so the
// result is bit-identical to the fused cast path.
std::vector<double> dequantize_group_razer(const QuantizedGroup& q, const DatatypeSpec& spec,
                                           const SVSet& sv_set);

// MSE of quantizing one group on the base grid extended with a single sv
// candidate (own two-sided scale). Used by sweeps and range derivation.
double razer_candidate_mse(std::span<const double> x, const DatatypeSpec& spec, double sv,
                           double alpha = 1.0);

// Nearest-map a group onto an explicit grid at a fixed, caller-chosen scale;
// returns the MSE. Used by the superset-grid monotonicity checks and sweeps.
double fixed_scale_mse(std::span<const double> x, const std::vector<double>& grid, double scale);

// Error metrics (raw sums, not means).
double mse(std::span<const double> x, std::span<const double> xhat);
double kl(std::span<const double> p, std::span<const double> q);

// Grid search over clip ratios; ties prefer alpha = 1.
struct ClipResult {
    double alpha;
    QuantizedGroup group;
};
ClipResult search_clip_ratio(std::span<const double> x, const DatatypeSpec& spec,
                             std::span<const double> candidates);

// Group-wise quantization along the innermost dimension; the final partial
// group of each row is zero-padded to g with the original length recorded
// in tail_len. Pad values are excluded from sv selection.
QuantizedTensor quantize_tensor(std::span<const double> data,
                                const std::vector<std::size_t>& dims, const QuantConfig& config,
                                const SVSet& sv_set);
std::vector<double> dequantize_tensor(const QuantizedTensor& qt);

double snap_scale_to_half(double s);

}  // namespace razer
