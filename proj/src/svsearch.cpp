// SPDX-License-Identifier: Apache-2.0
#include "razer/svsearch.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "razer/cmaes.hpp"

namespace razer {
namespace {

// Iterate groups of `g` over the flattened tensor (rows along the innermost
// dim are contiguous, so plain chunking matches group-wise layout when the
// inner dim is a multiple of g; trailing partial chunks stay unpadded).
template <typename F>
void for_each_group(std::span<const double> data, int group_size, F&& fn) {
    const auto g = static_cast<std::size_t>(group_size);
    for (std::size_t off = 0; off < data.size(); off += g)
        fn(data.subspan(off, std::min(g, data.size() - off)));
}

SVSet snap_candidate(std::span<const double> raw, const DatatypeSpec& spec) {
    std::vector<double> taken;
    SVSet s;
    for (std::size_t i = 0; i < 4; ++i) {
        s.values[i] =
            snap_sv_value(std::clamp(raw[i], -kSvStorageMax, kSvStorageMax), spec, taken);
        taken.push_back(s.values[i]);
    }
    return s;
}

double weight_mse_objective(const LayerSpec& layer, const DatatypeSpec& spec, const SVSet& sv,
                            int group_size) {
    QuantConfig cfg;
    cfg.dtype = spec.bits == 4 ? Dtype::Fp4Rzr : Dtype::Fp3Rzr;
    cfg.group_size = group_size;
    const QuantizedTensor qt = quantize_tensor(layer.weights.data, layer.weights.dims, cfg, sv);
    const std::vector<double> what = dequantize_tensor(qt);
    return mse(layer.weights.data, what);
}

double activation_objective(const LayerSpec& layer, const DatatypeSpec& spec, const SVSet& sv,
                            int group_size) {
    QuantConfig cfg;
    cfg.dtype = spec.bits == 4 ? Dtype::Fp4Rzr : Dtype::Fp3Rzr;
    cfg.group_size = group_size;
    const QuantizedTensor qt = quantize_tensor(layer.weights.data, layer.weights.dims, cfg, sv);
    const std::vector<double> what = dequantize_tensor(qt);

    const std::size_t cols = layer.weights.dims.back();
    const std::size_t rows = layer.weights.numel() / cols;
    const Tensor& xc = *layer.x_cal;
    const std::size_t samples = xc.dims.back();
    if (xc.dims.size() != 2 || xc.dims[0] != cols)
        throw std::invalid_argument("layer_objective: calibration shape mismatch");

    // || (W - What) X ||^2
    double acc = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t s = 0; s < samples; ++s) {
            double dot = 0.0;
            for (std::size_t c = 0; c < cols; ++c)
                dot += (layer.weights.data[r * cols + c] - what[r * cols + c]) *
                       xc.data[c * samples + s];
            acc += dot * dot;
        }
    }
    return acc;
}

LayerSpec kv_as_layer(const LayerSpec& layer) {
    LayerSpec kv;
    kv.name = layer.name;
    kv.weights = *layer.kv;
    return kv;
}

nlohmann::json svset_json(const SVSet& s) {
    return nlohmann::json(std::vector<double>(s.values.begin(), s.values.end()));
}

}  // namespace

SearchRange default_search_range(const DatatypeSpec& spec) {
    return spec.bits == 3 ? SearchRange{-9.0, 9.0} : SearchRange{-12.0, 12.0};
}

SweepResult sweep_sv_error(std::span<const double> data, const DatatypeSpec& spec,
                           std::span<const double> magnitudes, int group_size) {
    if (data.empty()) throw std::invalid_argument("sweep_sv_error: empty tensor");
    for (double m : magnitudes) {
        if (m <= 0.0) throw std::invalid_argument("sweep_sv_error: magnitudes must be positive");
    }
    SweepResult out;
    out.fp_baseline = 0.0;
    out.int_baseline = 0.0;
    for_each_group(data, group_size, [&](std::span<const double> grp) {
        const QuantizedGroup fp = quantize_group_fp(grp, spec);
        out.fp_baseline += mse(grp, dequantize_group_razer(fp, spec, default_sv_set()));
        const QuantizedGroup iq = quantize_group_int(grp, spec.bits);
        out.int_baseline += mse(grp, dequantize_group_int(iq));
    });
    for (double m : magnitudes) {
        SweepPoint p{m, 0.0, 0.0, 0.0};
        for_each_group(data, group_size, [&](std::span<const double> grp) {
            const double ep = razer_candidate_mse(grp, spec, m);
            const double en = razer_candidate_mse(grp, spec, -m);
            p.pos_err += ep;
            p.neg_err += en;
            p.pair_err += std::min(ep, en);
        });
        out.points.push_back(p);
    }
    return out;
}

SearchRange derive_search_range(std::span<const double> data, const DatatypeSpec& spec,
                                int group_size) {
    std::vector<double> mags;
    for (double m = 2.0; m <= 15.0; m += 1.0) mags.push_back(m);
    const SweepResult sweep = sweep_sv_error(data, spec, mags, group_size);
    if (sweep.fp_baseline <= 0.0) return default_search_range(spec);  // grid-exact input

    double max_pos = 0.0, max_neg = 0.0;
    for (const SweepPoint& p : sweep.points) {
        if (p.pos_err < sweep.fp_baseline) max_pos = std::max(max_pos, p.magnitude);
        if (p.neg_err < sweep.fp_baseline) max_neg = std::max(max_neg, p.magnitude);
    }
    if (max_pos == 0.0 && max_neg == 0.0) return default_search_range(spec);
    const SearchRange dflt = default_search_range(spec);
    // Keep at least the datatype default on a side with no winning magnitude.
    if (max_pos == 0.0) max_pos = dflt.sv_max;
    if (max_neg == 0.0) max_neg = -dflt.sv_min;
    return SearchRange{std::max(-kSvStorageMax, -max_neg), std::min(kSvStorageMax, max_pos)};
}

double layer_objective(const LayerSpec& layer, const DatatypeSpec& spec, const SVSet& sv_set,
                       int group_size) {
    return layer.x_cal.has_value() ? activation_objective(layer, spec, sv_set, group_size)
                                   : weight_mse_objective(layer, spec, sv_set, group_size);
}

LayerSearchResult search_layer_svset(const LayerSpec& layer, const DatatypeSpec& spec,
                                     const SearchRange& range, int budget, std::uint64_t seed,
                                     int group_size) {
    if (budget < 20) throw std::invalid_argument("search_layer_svset: budget must be >= 20");
    if (range.sv_max - range.sv_min < kSvStorageStep)
        throw std::invalid_argument("search_layer_svset: infeasible range");

    const auto objective = [&](std::span<const double> raw) {
        return layer_objective(layer, spec, snap_candidate(raw, spec), group_size);
    };

    const double lo = range.sv_min, hi = range.sv_max;
    const std::vector<double> x0 = {0.8 * lo, 0.4 * lo, 0.4 * hi, 0.8 * hi};
    CmaesOptions opt;
    opt.population = 16;
    opt.max_evals = budget;
    opt.seed = seed;
    opt.lower.assign(4, lo);
    opt.upper.assign(4, hi);
    const CmaesResult res = cmaes_minimize(objective, x0, opt);

    LayerSearchResult out;
    out.set = snap_candidate(res.best_x, spec);
    out.objective = res.best_f;
    out.evals = res.evals;
    return out;
}

ModelCalibration calibrate_model(const std::vector<LayerSpec>& layers,
                                 const DatatypeSpec& spec_w, const DatatypeSpec& spec_kv,
                                 int budget, std::uint64_t seed, int group_size_w,
                                 int group_size_kv) {
    if (layers.empty()) throw std::invalid_argument("calibrate_model: no layers");
    ModelCalibration cal;
    cal.seed = seed;
    cal.budget = budget;

    std::vector<SVSet> w_sets, kv_sets;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const LayerSpec& layer = layers[l];
        cal.layer_names.push_back(layer.name);

        const SearchRange rw =
            derive_search_range(layer.weights.data, spec_w, group_size_w);
        const LayerSearchResult rsw = search_layer_svset(layer, spec_w, rw, budget,
                                                         seed + 2 * l, group_size_w);
        w_sets.push_back(rsw.set);
        cal.layer_weight_objectives.push_back(rsw.objective);

        if (layer.kv.has_value()) {
            const LayerSpec kv = kv_as_layer(layer);
            const SearchRange rkv = derive_search_range(kv.weights.data, spec_kv, group_size_kv);
            const LayerSearchResult rskv =
                search_layer_svset(kv, spec_kv, rkv, budget, seed + 2 * l + 1, group_size_kv);
            kv_sets.push_back(rskv.set);
            cal.layer_kv_objectives.push_back(rskv.objective);
        }
    }

    cal.layer_weight_sets = round_svset(w_sets, spec_w);
    cal.model_weight_set = cluster_svsets(cal.layer_weight_sets, spec_w);
    if (!kv_sets.empty()) {
        cal.layer_kv_sets = round_svset(kv_sets, spec_kv);
        cal.model_kv_set = cluster_svsets(cal.layer_kv_sets, spec_kv);
    } else {
        cal.model_kv_set = default_sv_set();
    }
    return cal;
}

std::string calibration_report_json(const ModelCalibration& cal) {
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t l = 0; l < cal.layer_names.size(); ++l) {
        nlohmann::json entry{{"name", cal.layer_names[l]},
                             {"weight_sv", svset_json(cal.layer_weight_sets[l])},
                             {"weight_objective", cal.layer_weight_objectives[l]}};
        if (l < cal.layer_kv_sets.size()) {
            entry["kv_sv"] = svset_json(cal.layer_kv_sets[l]);
            entry["kv_objective"] = cal.layer_kv_objectives[l];
        }
        layers.push_back(entry);
    }
    const nlohmann::json doc{{"layers", layers},
                             {"model_weight_sv", svset_json(cal.model_weight_set)},
                             {"model_kv_sv", svset_json(cal.model_kv_set)},
                             {"seed", cal.seed},
                             {"budget", cal.budget}};
    return doc.dump(2);
}

}  // namespace razer
