// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace razer {

// Box-constrained (mu/mu_w, lambda) covariance matrix adaptation evolution
// strategy. Samples are clamped into the box before evaluation; the result
// is the best clamped candidate seen, including the initial population, so
// the best objective is monotone in the evaluation budget.
struct CmaesOptions {
    int population = 16;
    int max_evals = 200;
    double sigma0 = 0.0;  // 0 = 0.3 * box width
    std::uint64_t seed = 0;
    std::vector<double> lower;
    std::vector<double> upper;
};

struct CmaesResult {
    std::vector<double> best_x;
    double best_f = 0.0;
    int evals = 0;
};

CmaesResult cmaes_minimize(const std::function<double(std::span<const double>)>& objective,
                           std::span<const double> x0, const CmaesOptions& options);

}  // namespace razer
