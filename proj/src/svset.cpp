// SPDX-License-Identifier: Apache-2.0
#include "razer/svset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace razer {
namespace {

double storage_max_for_bits(int nbits) {
    return ((1 << (nbits - 1)) - 1) * kSvStorageStep;
}

bool taken_contains(const std::vector<double>& taken, double v) {
    for (double t : taken) {
        if (std::fabs(t - v) < 1e-9) return true;
    }
    return false;
}

}  // namespace

bool on_sv_storage_grid(double v) {
    const double scaled = v / kSvStorageStep;
    return std::fabs(scaled - std::rint(scaled)) < 1e-9 && std::fabs(v) <= kSvStorageMax;
}

bool on_base_grid(double v, const DatatypeSpec& spec) {
    for (double g : spec.grid) {
        if (std::fabs(g - v) < 1e-9) return true;
    }
    return false;
}

SVSet SVSet::checked(const std::array<double, 4>& values, const DatatypeSpec& spec) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!on_sv_storage_grid(values[i]))
            throw std::invalid_argument("SVSet: value off the 6-bit storage grid");
        if (on_base_grid(values[i], spec))
            throw std::invalid_argument("SVSet: value collides with the base grid");
        for (std::size_t j = i + 1; j < values.size(); ++j) {
            if (std::fabs(values[i] - values[j]) < 1e-9)
                throw std::invalid_argument("SVSet: duplicate value");
        }
    }
    return SVSet{values};
}

double snap_sv_value(double v, const DatatypeSpec& spec, const std::vector<double>& taken) {
    return [&] {
        const double maxv = kSvStorageMax;
        double p = std::rint(v / kSvStorageStep) * kSvStorageStep;
        p = std::clamp(p, -maxv, maxv);
        const double dir = (p > 0 || (p == 0 && v >= 0)) ? 1.0 : -1.0;
        auto ok = [&](double c) {
            return std::fabs(c) <= maxv + 1e-9 && !on_base_grid(c, spec) &&
                   !taken_contains(taken, c);
        };
        // Outward first (sv is most useful beyond the dense grid center),
        // then inward past the starting point if the range limit is hit.
        for (double c = p; std::fabs(c) <= maxv + 1e-9; c += dir * kSvStorageStep) {
            if (ok(c)) return c;
        }
        for (double c = p - dir * kSvStorageStep;; c -= dir * kSvStorageStep) {
            if (std::fabs(c) > maxv + 1e-9) break;
            if (ok(c)) return c;
        }
        throw std::invalid_argument("snap_sv_value: storage grid exhausted");
    }();
}

std::vector<SVSet> round_svset(const std::vector<SVSet>& sets, const DatatypeSpec& spec,
                               int nbits) {
    if (nbits < 3) throw std::invalid_argument("round_svset: nbits too small");
    // Non-default widths narrow the range; step stays at 0.5.
    const double maxv = std::min(storage_max_for_bits(nbits), kSvStorageMax);
    std::vector<SVSet> out;
    out.reserve(sets.size());
    for (const SVSet& s : sets) {
        std::vector<double> taken;
        SVSet r;
        for (std::size_t i = 0; i < 4; ++i) {
            const double clamped = std::clamp(s.values[i], -maxv, maxv);
            r.values[i] = snap_sv_value(clamped, spec, taken);
            taken.push_back(r.values[i]);
        }
        out.push_back(r);
    }
    return out;
}

SVSet cluster_svsets(const std::vector<SVSet>& sets, const DatatypeSpec& spec) {
    if (sets.empty()) throw std::invalid_argument("cluster_svsets: no input sets");
    std::vector<double> points;
    for (const SVSet& s : sets)
        for (double v : s.values) points.push_back(v);
    std::sort(points.begin(), points.end());

    // Farthest-point initialization from the smallest point; ties keep the
    // earlier point in sorted order, so the result is deterministic.
    std::vector<double> centroids{points.front()};
    while (centroids.size() < 4) {
        double best_d = -1.0;
        double best_p = points.front();
        for (double p : points) {
            double d = std::numeric_limits<double>::infinity();
            for (double c : centroids) d = std::min(d, std::fabs(p - c));
            if (d > best_d + 1e-12) {
                best_d = d;
                best_p = p;
            }
        }
        if (best_d <= 1e-12) {
            // Fewer than 4 distinct values; pad by outward stepping later.
            break;
        }
        centroids.push_back(best_p);
    }

    for (int iter = 0; iter < 100; ++iter) {
        std::vector<double> sum(centroids.size(), 0.0);
        std::vector<std::size_t> cnt(centroids.size(), 0);
        for (double p : points) {
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < centroids.size(); ++c) {
                const double d = std::fabs(p - centroids[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            sum[best] += p;
            cnt[best] += 1;
        }
        bool moved = false;
        for (std::size_t c = 0; c < centroids.size(); ++c) {
            if (cnt[c] == 0) continue;
            const double next = sum[c] / static_cast<double>(cnt[c]);
            if (std::fabs(next - centroids[c]) > 1e-12) moved = true;
            centroids[c] = next;
        }
        if (!moved) break;
    }

    std::vector<double> taken;
    SVSet out;
    for (std::size_t i = 0; i < 4; ++i) {
        const double raw = i < centroids.size() ? centroids[i] : taken.back();
        out.values[i] = snap_sv_value(std::clamp(raw, -kSvStorageMax, kSvStorageMax), spec, taken);
        taken.push_back(out.values[i]);
    }
    return out;
}

}  // namespace razer
