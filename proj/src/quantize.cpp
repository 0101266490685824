// SPDX-License-Identifier: Apache-2.0
#include "razer/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "razer/half.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace razer {
namespace {

const DatatypeSpec& spec_for(Dtype dtype) {
    switch (dtype) {
        case Dtype::Int4: return int_grid(4);
        case Dtype::Int3: return int_grid(3);
        case Dtype::Fp4Rzr: return fp4_grid();
        case Dtype::Fp3Rzr: return fp3_grid();
    }
    throw std::invalid_argument("unknown dtype");
}

// Extended grid (base values plus one sv) with code assignment.
struct ExtGrid {
    std::vector<double> values;
    std::vector<RzrCode> codes;
};

ExtGrid extend_grid(const DatatypeSpec& spec, double sv) {
    ExtGrid g;
    const auto pos = std::lower_bound(spec.grid.begin(), spec.grid.end(), sv);
    const std::size_t at = static_cast<std::size_t>(pos - spec.grid.begin());
    g.values = spec.grid;
    g.codes = spec.codes;
    g.values.insert(g.values.begin() + at, sv);
    g.codes.insert(g.codes.begin() + at, spec.sv_code);
    return g;
}

double two_sided_scale(std::span<const double> x, double max_pos, double min_neg, double alpha) {
    double pos = 0.0, neg = 0.0;
    for (double v : x) {
        pos = std::max(pos, v);
        neg = std::max(neg, -v);
    }
    const double s = alpha * std::max(pos / max_pos, neg / -min_neg);
    return s > 0.0 ? snap_scale_to_half(s) : 1.0;
}

}  // namespace

double snap_scale_to_half(double s) { return half_decode(half_encode(s)); }

std::size_t QuantizedTensor::numel() const {
    std::size_t n = 1;
    for (std::size_t d : dims) n *= d;
    return n;
}

std::size_t QuantizedTensor::groups_per_row() const {
    const std::size_t inner = dims.back();
    const auto g = static_cast<std::size_t>(config.group_size);
    return (inner + g - 1) / g;
}

QuantizedGroup quantize_group_int(std::span<const double> x, int bits, double alpha,
                                  double beta) {
    if (x.empty()) throw std::invalid_argument("quantize_group_int: empty group");
    const int qmax = (1 << bits) - 1;
    double lo = x[0], hi = x[0];
    for (double v : x) {
        if (!std::isfinite(v)) throw std::invalid_argument("quantize_group_int: non-finite input");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    double s = (alpha * hi - beta * lo) / qmax;
    if (hi == lo || s <= 0.0) s = 1.0;
    s = snap_scale_to_half(s);
    const int z = std::clamp(static_cast<int>(-std::rint(beta * lo / s)), 0, qmax);

    QuantizedGroup q;
    q.codes.reserve(x.size());
    for (double v : x) {
        const int c = std::clamp(static_cast<int>(std::rint(v / s)) + z, 0, qmax);
        q.codes.push_back(static_cast<RzrCode>(c));
    }
    q.params = IntGroupParams{s, z, bits};
    return q;
}

std::vector<double> dequantize_group_int(const QuantizedGroup& q) {
    const auto* p = std::get_if<IntGroupParams>(&q.params);
    if (p == nullptr) throw std::invalid_argument("dequantize_group_int: wrong params kind");
    std::vector<double> out;
    out.reserve(q.codes.size());
    const auto s = static_cast<float>(p->scale);
    for (RzrCode c : q.codes)
        out.push_back(static_cast<double>(static_cast<float>(c - p->zero_point) * s));
    return out;
}

QuantizedGroup quantize_group_fp(std::span<const double> x, const DatatypeSpec& spec,
                                 double alpha) {
    if (x.empty()) throw std::invalid_argument("quantize_group_fp: empty group");
    const double s = two_sided_scale(x, spec.max_positive(), spec.min_negative(), alpha);
    QuantizedGroup q;
    q.codes.reserve(x.size());
    for (double v : x) {
        const NearestHit hit = nearest_grid_value(v / s, spec.grid);
        q.codes.push_back(spec.codes[hit.index]);
    }
    q.params = RzrGroupParams{s, 0};
    return q;
}

QuantizedGroup quantize_group_razer(std::span<const double> x, const DatatypeSpec& spec,
                                    const SVSet& sv_set, double alpha, std::size_t valid_len) {
    if (x.empty()) throw std::invalid_argument("quantize_group_razer: empty group");
    if (valid_len == 0 || valid_len > x.size()) valid_len = x.size();

    QuantizedGroup best;
    double best_err = std::numeric_limits<double>::infinity();
    for (int idx = 0; idx < 4; ++idx) {
        const ExtGrid g = extend_grid(spec, sv_set.values[idx]);
        const double s = two_sided_scale(x, g.values.back(), g.values.front(), alpha);
        QuantizedGroup q;
        q.codes.reserve(x.size());
        double err = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const NearestHit hit = nearest_grid_value(x[i] / s, g.values);
            q.codes.push_back(g.codes[hit.index]);
            if (i < valid_len) {
                const double d = x[i] - hit.value * s;
                err += d * d;
            }
        }
        if (err < best_err) {
            best_err = err;
            q.params = RzrGroupParams{s, idx};
            best = std::move(q);
        }
    }
    return best;
}

std::vector<double> dequantize_group_razer(const QuantizedGroup& q, const DatatypeSpec& spec,
                                           const SVSet& sv_set) {
    const auto* p = std::get_if<RzrGroupParams>(&q.params);
    if (p == nullptr) throw std::invalid_argument("dequantize_group_razer: wrong params kind");
    // Code -> value table, sv slot included.
    std::array<float, 16> table{};
    for (std::size_t i = 0; i < spec.grid.size(); ++i)
        table[spec.codes[i]] = static_cast<float>(spec.grid[i]);
    if (spec.has_sv) table[spec.sv_code] = static_cast<float>(sv_set.values[p->sv_index]);

    const auto s = static_cast<float>(p->scale);
    std::vector<double> out;
    out.reserve(q.codes.size());
    for (RzrCode c : q.codes) {
        if (c >= (1u << spec.bits))
            throw std::invalid_argument("dequantize_group_razer: invalid code");
        out.push_back(static_cast<double>(table[c] * s));
    }
    return out;
}

double razer_candidate_mse(std::span<const double> x, const DatatypeSpec& spec, double sv,
                           double alpha) {
    if (x.empty()) throw std::invalid_argument("razer_candidate_mse: empty group");
    const ExtGrid g = extend_grid(spec, sv);
    const double s = two_sided_scale(x, g.values.back(), g.values.front(), alpha);
    double err = 0.0;
    for (double v : x) {
        const NearestHit hit = nearest_grid_value(v / s, g.values);
        const double d = v - hit.value * s;
        err += d * d;
    }
    return err;
}

double fixed_scale_mse(std::span<const double> x, const std::vector<double>& grid, double scale) {
    double err = 0.0;
    for (double v : x) {
        const NearestHit hit = nearest_grid_value(v / scale, grid);
        const double d = v - hit.value * scale;
        err += d * d;
    }
    return err;
}

double mse(std::span<const double> x, std::span<const double> xhat) {
    if (x.size() != xhat.size()) throw std::invalid_argument("mse: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - xhat[i];
        acc += d * d;
    }
    return acc;
}

double kl(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("kl: length mismatch");
    double sp = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] < 0.0 || q[i] < 0.0) throw std::invalid_argument("kl: negative probability");
        sp += p[i];
        sq += q[i];
    }
    if (std::fabs(sp - 1.0) > 1e-6 || std::fabs(sq - 1.0) > 1e-6)
        throw std::invalid_argument("kl: inputs must sum to 1");
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] == 0.0) throw std::invalid_argument("kl: P > 0 where Q == 0");
        acc += p[i] * std::log(p[i] / q[i]);
    }
    return acc;
}

ClipResult search_clip_ratio(std::span<const double> x, const DatatypeSpec& spec,
                             std::span<const double> candidates) {
    if (candidates.empty()) throw std::invalid_argument("search_clip_ratio: no candidates");
    ClipResult best{0.0, {}};
    double best_err = std::numeric_limits<double>::infinity();
    for (double a : candidates) {
        if (a <= 0.0 || a > 1.0)
            throw std::invalid_argument("search_clip_ratio: alpha outside (0, 1]");
        QuantizedGroup q = quantize_group_fp(x, spec, a);
        const std::vector<double> xhat = dequantize_group_razer(q, spec, default_sv_set());
        const double err = mse(x, xhat);
        if (err < best_err || (err == best_err && a > best.alpha)) {
            best_err = err;
            best = ClipResult{a, std::move(q)};
        }
    }
    return best;
}

QuantizedTensor quantize_tensor(std::span<const double> data,
                                const std::vector<std::size_t>& dims, const QuantConfig& config,
                                const SVSet& sv_set) {
    if (data.empty() || dims.empty()) throw std::invalid_argument("quantize_tensor: empty tensor");
    std::size_t numel = 1;
    for (std::size_t d : dims) numel *= d;
    if (numel != data.size()) throw std::invalid_argument("quantize_tensor: dims/data mismatch");

    const auto g = static_cast<std::size_t>(config.group_size);
    const std::size_t inner = dims.back();
    const std::size_t rows = numel / inner;
    const std::size_t gpr = (inner + g - 1) / g;
    const std::size_t tail = inner - (gpr - 1) * g;
    const DatatypeSpec& spec = spec_for(config.dtype);

    QuantizedTensor qt;
    qt.dims = dims;
    qt.config = config;
    qt.sv_set = sv_set;
    qt.tail_len = tail;
    qt.groups.resize(rows * gpr);

    const auto total = static_cast<std::ptrdiff_t>(rows * gpr);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t gi = 0; gi < total; ++gi) {
        const std::size_t row = static_cast<std::size_t>(gi) / gpr;
        const std::size_t col = static_cast<std::size_t>(gi) % gpr;
        const std::size_t off = row * inner + col * g;
        const std::size_t len = col + 1 == gpr ? tail : g;
        const std::span<const double> slice = data.subspan(off, len);

        QuantizedGroup q;
        RzrCode pad_code = 0;
        switch (config.dtype) {
            case Dtype::Int4:
            case Dtype::Int3: {
                const int bits = config.dtype == Dtype::Int4 ? 4 : 3;
                q = quantize_group_int(slice, bits, config.clip_alpha, config.clip_beta);
                pad_code = static_cast<RzrCode>(std::get<IntGroupParams>(q.params).zero_point);
                break;
            }
            case Dtype::Fp4Rzr:
            case Dtype::Fp3Rzr:
                q = quantize_group_razer(slice, spec, sv_set, config.clip_alpha);
                pad_code = spec.bits == 4 ? kFp4ZeroCode : kFp3ZeroCode;
                break;
        }
        q.codes.resize(g, pad_code);
        qt.groups[static_cast<std::size_t>(gi)] = std::move(q);
    }
    return qt;
}

std::vector<double> dequantize_tensor(const QuantizedTensor& qt) {
    const auto g = static_cast<std::size_t>(qt.config.group_size);
    const std::size_t inner = qt.dims.back();
    const std::size_t gpr = qt.groups_per_row();
    const std::size_t rows = qt.numel() / inner;
    const DatatypeSpec& spec = spec_for(qt.config.dtype);

    std::vector<double> out(qt.numel());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(rows); ++r) {
        for (std::size_t c = 0; c < gpr; ++c) {
            const QuantizedGroup& q = qt.groups[static_cast<std::size_t>(r) * gpr + c];
            const std::vector<double> vals =
                std::holds_alternative<IntGroupParams>(q.params)
                    ? dequantize_group_int(q)
                    : dequantize_group_razer(q, spec, qt.sv_set);
            const std::size_t len = c + 1 == gpr ? qt.tail_len : g;
            for (std::size_t i = 0; i < len; ++i)
                out[static_cast<std::size_t>(r) * inner + c * g + i] = vals[i];
        }
    }
    return out;
}

}  // namespace razer
