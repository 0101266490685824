// SPDX-License-Identifier: Apache-2.0
#include "razer/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace razer {
namespace {

using Matrix = std::vector<double>;  // n x n, row-major

// Jacobi eigendecomposition of a symmetric matrix. Dimensions here are
// tiny (4), so the classic sweep is plenty.
void eigen_sym(const Matrix& a_in, std::size_t n, Matrix& vecs, std::vector<double>& vals) {
    Matrix a = a_in;
    vecs.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) vecs[i * n + i] = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
        if (off < 1e-24) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::fabs(a[p * n + q]) < 1e-18) continue;
                const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * a[p * n + q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a[i * n + p], aiq = a[i * n + q];
                    a[i * n + p] = c * aip - s * aiq;
                    a[i * n + q] = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double api = a[p * n + i], aqi = a[q * n + i];
                    a[p * n + i] = c * api - s * aqi;
                    a[q * n + i] = s * api + c * aqi;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = vecs[i * n + p], viq = vecs[i * n + q];
                    vecs[i * n + p] = c * vip - s * viq;
                    vecs[i * n + q] = s * vip + c * viq;
                }
            }
        }
    }
    vals.resize(n);
    for (std::size_t i = 0; i < n; ++i) vals[i] = std::max(a[i * n + i], 1e-20);
}

}  // namespace

CmaesResult cmaes_minimize(const std::function<double(std::span<const double>)>& objective,
                           std::span<const double> x0, const CmaesOptions& options) {
    const std::size_t n = x0.size();
    if (n == 0) throw std::invalid_argument("cmaes_minimize: empty start point");
    if (options.lower.size() != n || options.upper.size() != n)
        throw std::invalid_argument("cmaes_minimize: bound size mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        if (options.lower[i] >= options.upper[i])
            throw std::invalid_argument("cmaes_minimize: infeasible bounds");
    }

    const int lambda = std::max(options.population, 4);
    const int mu = lambda / 2;
    std::vector<double> weights(mu);
    for (int i = 0; i < mu; ++i) weights[i] = std::log(mu + 0.5) - std::log(i + 1.0);
    const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (double& w : weights) w /= wsum;
    const double mu_eff =
        1.0 / std::inner_product(weights.begin(), weights.end(), weights.begin(), 0.0);

    const auto nd = static_cast<double>(n);
    const double cc = (4.0 + mu_eff / nd) / (nd + 4.0 + 2.0 * mu_eff / nd);
    const double cs = (mu_eff + 2.0) / (nd + mu_eff + 5.0);
    const double c1 = 2.0 / ((nd + 1.3) * (nd + 1.3) + mu_eff);
    const double cmu = std::min(1.0 - c1, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) /
                                              ((nd + 2.0) * (nd + 2.0) + mu_eff));
    const double damps =
        1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff - 1.0) / (nd + 1.0)) - 1.0) + cs;
    const double chi_n = std::sqrt(nd) * (1.0 - 1.0 / (4.0 * nd) + 1.0 / (21.0 * nd * nd));

    double box = 0.0;
    for (std::size_t i = 0; i < n; ++i) box = std::max(box, options.upper[i] - options.lower[i]);
    double sigma = options.sigma0 > 0.0 ? options.sigma0 : 0.3 * box;

    std::vector<double> mean(x0.begin(), x0.end());
    Matrix cov(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) cov[i * n + i] = 1.0;
    std::vector<double> ps(n, 0.0), pc(n, 0.0);

    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    CmaesResult result;
    result.best_f = std::numeric_limits<double>::infinity();

    struct Candidate {
        std::vector<double> x;  // clamped
        std::vector<double> z;  // raw standard-normal draw
        double f;
    };

    while (result.evals < options.max_evals) {
        Matrix vecs;
        std::vector<double> vals;
        eigen_sym(cov, n, vecs, vals);
        std::vector<double> sqrt_vals(n);
        for (std::size_t i = 0; i < n; ++i) sqrt_vals[i] = std::sqrt(vals[i]);

        std::vector<Candidate> pop;
        pop.reserve(static_cast<std::size_t>(lambda));
        for (int k = 0; k < lambda && result.evals < options.max_evals; ++k) {
            Candidate c;
            c.z.resize(n);
            for (double& z : c.z) z = gauss(rng);
            c.x.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                double step = 0.0;
                for (std::size_t j = 0; j < n; ++j)
                    step += vecs[i * n + j] * sqrt_vals[j] * c.z[j];
                c.x[i] = std::clamp(mean[i] + sigma * step, options.lower[i], options.upper[i]);
            }
            c.f = objective(c.x);
            ++result.evals;
            if (c.f < result.best_f) {
                result.best_f = c.f;
                result.best_x = c.x;
            }
            pop.push_back(std::move(c));
        }
        if (static_cast<int>(pop.size()) < mu) break;

        std::sort(pop.begin(), pop.end(),
                  [](const Candidate& a, const Candidate& b) { return a.f < b.f; });

        std::vector<double> old_mean = mean;
        std::fill(mean.begin(), mean.end(), 0.0);
        for (int k = 0; k < mu; ++k)
            for (std::size_t i = 0; i < n; ++i) mean[i] += weights[k] * pop[k].x[i];

        // C^{-1/2} * (mean shift) via the eigenbasis.
        std::vector<double> y(n), z_mean(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) y[i] = (mean[i] - old_mean[i]) / sigma;
        for (std::size_t j = 0; j < n; ++j) {
            double proj = 0.0;
            for (std::size_t i = 0; i < n; ++i) proj += vecs[i * n + j] * y[i];
            proj /= sqrt_vals[j];
            for (std::size_t i = 0; i < n; ++i) z_mean[i] += vecs[i * n + j] * proj;
        }

        double ps_norm2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            ps[i] = (1.0 - cs) * ps[i] + std::sqrt(cs * (2.0 - cs) * mu_eff) * z_mean[i];
            ps_norm2 += ps[i] * ps[i];
        }
        const double hsig = std::sqrt(ps_norm2) / chi_n < 1.4 + 2.0 / (nd + 1.0) ? 1.0 : 0.0;
        for (std::size_t i = 0; i < n; ++i)
            pc[i] = (1.0 - cc) * pc[i] + hsig * std::sqrt(cc * (2.0 - cc) * mu_eff) * y[i];

        Matrix next(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                double rank_mu = 0.0;
                for (int k = 0; k < mu; ++k) {
                    const double yi = (pop[k].x[i] - old_mean[i]) / sigma;
                    const double yj = (pop[k].x[j] - old_mean[j]) / sigma;
                    rank_mu += weights[k] * yi * yj;
                }
                next[i * n + j] = (1.0 - c1 - cmu) * cov[i * n + j] + c1 * pc[i] * pc[j] +
                                  cmu * rank_mu;
            }
        }
        cov = std::move(next);
        sigma *= std::exp((cs / damps) * (std::sqrt(ps_norm2) / chi_n - 1.0));
        sigma = std::clamp(sigma, 1e-12, 2.0 * box);
    }
    return result;
}

}  // namespace razer
