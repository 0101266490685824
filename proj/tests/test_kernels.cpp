// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "razer/bench.hpp"
#include "razer/gemv.hpp"
#include "razer/kvcache.hpp"

using namespace razer;

namespace {

std::vector<double> randn(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<double> out(n);
    for (double& v : out) v = dist(rng);
    return out;
}

std::vector<float> randnf(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> dist(0.0f, 1.0f);
    std::vector<float> out(n);
    for (float& v : out) v = dist(rng);
    return out;
}

}  // namespace

TEST_CASE("quantize_matrix layout") {
    const std::vector<double> w = randn(4 * 300, 1);
    const QuantizedMatrix wq = quantize_matrix(w, 4, 300, 128, default_sv_set());
    CHECK(wq.rows == 4);
    CHECK(wq.cols == 300);
    CHECK(wq.groups_per_row() == 3);
    CHECK(wq.tail_len == 44);
    CHECK(wq.scales.size() == 12);
    CHECK(wq.sv_indices.size() == 12);
    CHECK(wq.payload.size() == 12);
    // 128 codes per group, 16 words, 4 bytes each.
    CHECK(wq.payload_bytes() == 12 * 16 * 4);
}

TEST_CASE("dequantize_matrix matches the tensor path") {
    const std::vector<double> w = randn(4 * 300, 2);
    const QuantizedMatrix wq = quantize_matrix(w, 4, 300, 128, default_sv_set());
    const std::vector<float> wf = dequantize_matrix(wq);
    REQUIRE(wf.size() == w.size());
    QuantConfig cfg;
    cfg.dtype = Dtype::Fp4Rzr;
    cfg.group_size = 128;
    const QuantizedTensor qt = quantize_tensor(w, {4, 300}, cfg, default_sv_set());
    const std::vector<double> ref = dequantize_tensor(qt);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(wf[i] == static_cast<float>(ref[i]));
}

TEST_CASE("fused gemv is bit-identical to the serial reference") {
    const std::vector<std::pair<std::size_t, std::size_t>> shapes = {
        {8, 256}, {3, 130} /* padded tail */, {17, 512}, {1, 128}};
    for (auto [rows, cols] : shapes) {
        const std::vector<double> w = randn(rows * cols, rows * 1000 + cols);
        const QuantizedMatrix wq = quantize_matrix(w, rows, cols, 128, default_sv_set());
        const std::vector<float> x = randnf(cols, cols);
        const std::vector<float> fused = gemv_fused(wq, x);
        const std::vector<float> wf = dequantize_matrix(wq);
        const std::vector<float> ref = gemv_reference(wf, rows, cols, x);
        REQUIRE(fused.size() == rows);
        for (std::size_t r = 0; r < rows; ++r) CHECK(fused[r] == ref[r]);
    }
}

TEST_CASE("gemv matches a double-precision oracle to float tolerance") {
    const std::size_t rows = 8, cols = 384;
    const std::vector<double> w = randn(rows * cols, 77);
    const QuantizedMatrix wq = quantize_matrix(w, rows, cols, 128, default_sv_set());
    const std::vector<float> x = randnf(cols, 78);
    const std::vector<float> fused = gemv_fused(wq, x);
    const std::vector<float> wf = dequantize_matrix(wq);
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = 0.0;
        for (std::size_t k = 0; k < cols; ++k)
            acc += static_cast<double>(wf[r * cols + k]) * static_cast<double>(x[k]);
        CHECK(fused[r] == doctest::Approx(acc).epsilon(1e-4));
    }
}

TEST_CASE("kv cache flush accounting") {
    KvConfig cfg;
    cfg.group_size = 64;
    cfg.buffer_capacity = 64;
    const std::size_t dim = 128;
    KvCacheState cache(dim, cfg, default_sv_set());
    const std::size_t T = 200;
    for (std::size_t t = 0; t < T; ++t) {
        const std::vector<double> k = randn(dim, 2 * t);
        const std::vector<double> v = randn(dim, 2 * t + 1);
        cache.append(k, v);
        CHECK(cache.total_tokens() == t + 1);
        CHECK(cache.flush_events() == (t + 1) / 64);
        CHECK(cache.buffered_tokens() == (t + 1) % 64);
        CHECK(cache.buffered_tokens() + cache.block_count() * 64 == t + 1);
    }
    CHECK(cache.flush_events() == T / 64);  // 3
    CHECK(cache.block_count() == 3);
    CHECK(cache.buffered_tokens() == 8);
}

TEST_CASE("kv cache materialization and attention") {
    KvConfig cfg;
    cfg.group_size = 64;
    cfg.buffer_capacity = 16;
    const std::size_t dim = 64, T = 40;
    KvCacheState cache(dim, cfg, default_sv_set());
    std::vector<double> keys_fp, values_fp;
    for (std::size_t t = 0; t < T; ++t) {
        const std::vector<double> k = randn(dim, 100 + 2 * t);
        const std::vector<double> v = randn(dim, 101 + 2 * t);
        keys_fp.insert(keys_fp.end(), k.begin(), k.end());
        values_fp.insert(values_fp.end(), v.begin(), v.end());
        cache.append(k, v);
    }

    std::vector<double> keys, values;
    cache.materialize(keys, values);
    REQUIRE(keys.size() == T * dim);
    REQUIRE(values.size() == T * dim);

    SUBCASE("buffered tokens are stored exactly") {
        // 40 = 2 flushes of 16 + 8 buffered; the last 8 tokens are unquantized.
        for (std::size_t i = 32 * dim; i < T * dim; ++i) {
            CHECK(keys[i] == keys_fp[i]);
            CHECK(values[i] == values_fp[i]);
        }
    }
    SUBCASE("quantized tokens carry bounded error") {
        double err = 0.0;
        for (std::size_t i = 0; i < 32 * dim; ++i) err += std::pow(keys[i] - keys_fp[i], 2);
        CHECK(err / (32 * dim) < 0.05);  // 4-bit groups of standard normals
        CHECK(err > 0.0);                // and the data is actually quantized
    }
    SUBCASE("attention equals the oracle on the materialized tensors") {
        const std::vector<double> q = randn(dim, 999);
        const std::vector<double> got = cache.attention(q);
        const std::vector<double> want = attention_full(keys, values, T, dim, q);
        REQUIRE(got.size() == dim);
        for (std::size_t i = 0; i < dim; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
    SUBCASE("quantized attention stays near the full-precision result") {
        const std::vector<double> q = randn(dim, 998);
        const std::vector<double> got = cache.attention(q);
        const std::vector<double> want = attention_full(keys_fp, values_fp, T, dim, q);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            num += std::pow(got[i] - want[i], 2);
            den += want[i] * want[i];
        }
        CHECK(std::sqrt(num / den) < 0.15);
    }
}

TEST_CASE("kv cache passthrough mode is lossless") {
    KvConfig cfg;
    cfg.dtype = std::nullopt;
    cfg.buffer_capacity = 8;
    const std::size_t dim = 32, T = 20;
    KvCacheState cache(dim, cfg, default_sv_set());
    std::vector<double> keys_fp, values_fp;
    for (std::size_t t = 0; t < T; ++t) {
        const std::vector<double> k = randn(dim, 500 + 2 * t);
        const std::vector<double> v = randn(dim, 501 + 2 * t);
        keys_fp.insert(keys_fp.end(), k.begin(), k.end());
        values_fp.insert(values_fp.end(), v.begin(), v.end());
        cache.append(k, v);
    }
    CHECK(cache.flush_events() == T / 8);
    std::vector<double> keys, values;
    cache.materialize(keys, values);
    CHECK(keys == keys_fp);
    CHECK(values == values_fp);
    const std::vector<double> q = randn(dim, 777);
    const std::vector<double> got = cache.attention(q);
    const std::vector<double> want = attention_full(keys_fp, values_fp, T, dim, q);
    for (std::size_t i = 0; i < dim; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("attention_full oracle properties") {
    const std::size_t dim = 4;
    // One token: attention returns its value row exactly.
    const std::vector<double> k = {1, 0, 0, 0};
    const std::vector<double> v = {3, -1, 2, 0.5};
    const std::vector<double> q = {0.2, 0.1, 0, 0};
    const std::vector<double> out = attention_full(k, v, 1, dim, q);
    for (std::size_t i = 0; i < dim; ++i) CHECK(out[i] == doctest::Approx(v[i]));
    // Identical tokens: the softmax is uniform, output equals the value row.
    std::vector<double> k2(k), v2(v);
    k2.insert(k2.end(), k.begin(), k.end());
    v2.insert(v2.end(), v.begin(), v.end());
    const std::vector<double> out2 = attention_full(k2, v2, 2, dim, q);
    for (std::size_t i = 0; i < dim; ++i) CHECK(out2[i] == doctest::Approx(v[i]));
}

TEST_CASE("gemv bench self-check and csv shape") {
    const std::vector<std::pair<std::size_t, std::size_t>> shapes = {{64, 256}, {32, 512}};
    const std::vector<BenchRow> rows = bench_gemv(shapes, 3, 128, 9);
    REQUIRE(rows.size() == 4);  // fused + reference per shape
    for (const BenchRow& r : rows) {
        CHECK((r.path == "fused" || r.path == "reference"));
        CHECK(r.median_ns > 0);
        CHECK(r.baseline_bytes == r.rows * r.cols * 2);
        CHECK(r.payload_bytes * 4 == r.baseline_bytes * 1);  // 4 bits vs 16
    }
    const std::string csv = bench_csv(rows);
    std::istringstream ss(csv);
    std::string line;
    std::getline(ss, line);
    CHECK(line == "shape,path,median_ns,payload_bytes,baseline_bytes");
    int data_lines = 0;
    while (std::getline(ss, line))
        if (!line.empty()) ++data_lines;
    CHECK(data_lines == 4);
}
