// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "razer/container.hpp"
#include "razer/quantize.hpp"
#include "razer/svset.hpp"

namespace razer {

struct SearchRange {
    double sv_min;
    double sv_max;
};

SearchRange default_search_range(const DatatypeSpec& spec);  // FP3: +-9, FP4: +-12

// One model layer for calibration: weights plus optional calibration
// activations (cols x samples) and optional KV-cache tensor.
struct LayerSpec {
    std::string name;
    Tensor weights;               // rows x cols
    std::optional<Tensor> x_cal;  // cols x samples
    std::optional<Tensor> kv;
};

// Per-magnitude quantization error of extending the base grid with a single
// special value. `pair_err` lets each group pick the better sign, matching
// per-group sv selection; `pos_err`/`neg_err` pin each side separately.
struct SweepPoint {
    double magnitude;
    double pair_err;
    double pos_err;
    double neg_err;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    double fp_baseline;   // plain FP grid, no sv
    double int_baseline;  // asymmetric INT at the same bit width
};

SweepResult sweep_sv_error(std::span<const double> data, const DatatypeSpec& spec,
                           std::span<const double> magnitudes, int group_size);

// Sweeps integer magnitudes and keeps, per side, the largest magnitude that
// beats the plain-FP baseline; falls back to the datatype default when the
// sweep is degenerate (e.g. grid-exact data). Clamped to the storage range.
SearchRange derive_search_range(std::span<const double> data, const DatatypeSpec& spec,
                                int group_size);

struct LayerSearchResult {
    SVSet set;
    double objective;
    int evals;
};

// CMA-ES search for 4 special values in `range`, minimizing the layer output
// activation error when calibration activations are present and the weight
// MSE otherwise. Candidates are snapped onto the 6-bit storage grid (off the
// base grid) before evaluation, so the returned set always satisfies the
// SVSet invariants and its objective is the best one actually evaluated.
LayerSearchResult search_layer_svset(const LayerSpec& layer, const DatatypeSpec& spec,
                                     const SearchRange& range, int budget, std::uint64_t seed,
                                     int group_size = 128);

// Objective used by search_layer_svset, exposed for oracles and reports.
double layer_objective(const LayerSpec& layer, const DatatypeSpec& spec, const SVSet& sv_set,
                       int group_size = 128);

struct ModelCalibration {
    std::vector<std::string> layer_names;
    std::vector<SVSet> layer_weight_sets;
    std::vector<double> layer_weight_objectives;
    std::vector<SVSet> layer_kv_sets;  // empty when no layer carries KV
    std::vector<double> layer_kv_objectives;
    SVSet model_weight_set;
    SVSet model_kv_set;
    std::uint64_t seed = 0;
    int budget = 0;
};

// Per-layer search for weights and KV, 6-bit rounding, then clustering to
// one 4-entry set per tensor kind. Layers without KV fall back to the
// default set for the KV side.
ModelCalibration calibrate_model(const std::vector<LayerSpec>& layers,
                                 const DatatypeSpec& spec_w, const DatatypeSpec& spec_kv,
                                 int budget, std::uint64_t seed, int group_size_w = 128,
                                 int group_size_kv = 64);

// Calibration report as a JSON document (see docs/calibration.schema.json).
std::string calibration_report_json(const ModelCalibration& cal);

}  // namespace razer
