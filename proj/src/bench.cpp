// SPDX-License-Identifier: Apache-2.0
#include "razer/bench.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <sstream>
#include <stdexcept>

#include "razer/gemv.hpp"

namespace razer {
namespace {

template <typename F>
std::uint64_t median_ns(int reps, F&& fn) {
    std::vector<std::uint64_t> times;
    times.reserve(static_cast<std::size_t>(reps));
    for (int i = 0; i < reps; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        times.push_back(static_cast<std::uint64_t>(
            std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count()));
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

}  // namespace

std::vector<BenchRow> bench_gemv(const std::vector<std::pair<std::size_t, std::size_t>>& shapes,
                                 int reps, int group_size, std::uint64_t seed) {
    if (reps < 3) throw std::invalid_argument("bench_gemv: reps must be >= 3");
    std::vector<BenchRow> out;
    for (const auto& [n, k] : shapes) {
        std::mt19937_64 rng(seed ^ (n * 0x9E3779B97F4A7C15ull + k));
        std::normal_distribution<double> dist(0.0, 1.0);
        std::vector<double> w(n * k);
        for (double& v : w) v = dist(rng);
        std::vector<float> x(k);
        for (float& v : x) v = static_cast<float>(dist(rng));

        const QuantizedMatrix wq = quantize_matrix(w, n, k, group_size, default_sv_set());
        const std::vector<float> wd = dequantize_matrix(wq);

        // Self-check before timing.
        const std::vector<float> yf = gemv_fused(wq, x);
        const std::vector<float> yr = gemv_reference(wd, n, k, x);
        if (yf != yr) throw std::runtime_error("bench_gemv: fused/reference mismatch");

        const std::size_t payload = wq.payload_bytes();
        const std::size_t baseline = n * k * 2;  // fp16
        out.push_back({n, k, "fused", median_ns(reps, [&] { gemv_fused(wq, x); }), payload,
                       baseline});
        out.push_back({n, k, "reference", median_ns(reps, [&] { gemv_reference(wd, n, k, x); }),
                       payload, baseline});
    }
    return out;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
    std::ostringstream os;
    os << "shape,path,median_ns,payload_bytes,baseline_bytes\n";
    for (const BenchRow& r : rows) {
        os << r.rows << "x" << r.cols << "," << r.path << "," << r.median_ns << ","
           << r.payload_bytes << "," << r.baseline_bytes << "\n";
    }
    return os.str();
}

}  // namespace razer
