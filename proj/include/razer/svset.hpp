// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <vector>

#include "razer/grids.hpp"

namespace razer {

inline constexpr double kSvStorageStep = 0.5;
inline constexpr double kSvStorageMax = 15.5;  // sign + 5 bits at 0.5 step

// Exactly four special-value candidates on the 6-bit storage grid.
// Each value must be off the base grid of its datatype and distinct.
struct SVSet {
    std::array<double, 4> values{};

    // Validates against `spec`; throws std::invalid_argument on violation.
    static SVSet checked(const std::array<double, 4>& values, const DatatypeSpec& spec);
};

// The set from the default cast table {0x4500, 0x4800, 0xC500, 0xC800}.
inline SVSet default_sv_set() { return SVSet{{5.0, 8.0, -5.0, -8.0}}; }

bool on_sv_storage_grid(double v);
bool on_base_grid(double v, const DatatypeSpec& spec);

// Snaps a raw candidate onto the storage grid, nudging outward (away from
// zero) by one step while it collides with the base grid or with an entry
// already in `taken`. Steps back inward if the outward walk hits the range
// limit.
double snap_sv_value(double v, const DatatypeSpec& spec, const std::vector<double>& taken);

// Rounds every set onto the 6-bit storage grid, resolving base-grid
// collisions and duplicates by outward nudges.
std::vector<SVSet> round_svset(const std::vector<SVSet>& sets, const DatatypeSpec& spec,
                               int nbits = 6);

// k-means (k=4) over the union of all values, deterministic farthest-point
// initialization; centroids rounded onto the storage grid.
SVSet cluster_svsets(const std::vector<SVSet>& sets, const DatatypeSpec& spec);

}  // namespace razer
