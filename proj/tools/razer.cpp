// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: quantize / dequantize tensors, sweep special-value
// error curves, calibrate special-value sets, simulate KV-cache buffering,
// and benchmark the fused GEMV path.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "razer/bench.hpp"
#include "razer/container.hpp"
#include "razer/half.hpp"
#include "razer/kvcache.hpp"
#include "razer/pack.hpp"
#include "razer/svsearch.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace razer;

Dtype parse_dtype(const std::string& s) {
    if (s == "int4") return Dtype::Int4;
    if (s == "int3") return Dtype::Int3;
    if (s == "fp4rzr") return Dtype::Fp4Rzr;
    if (s == "fp3rzr") return Dtype::Fp3Rzr;
    throw CLI::ValidationError("--dtype", "unknown dtype: " + s);
}

bool is_razer(Dtype d) { return d == Dtype::Fp4Rzr || d == Dtype::Fp3Rzr; }
int code_bits(Dtype d) { return d == Dtype::Int4 || d == Dtype::Fp4Rzr ? 4 : 3; }

const DatatypeSpec& razer_spec_of(Dtype d) {
    return code_bits(d) == 4 ? fp4_grid() : fp3_grid();
}

SVSet parse_sv_list(const std::string& s, const DatatypeSpec& spec) {
    std::array<double, 4> vals{};
    std::stringstream ss(s);
    std::string item;
    std::size_t i = 0;
    while (std::getline(ss, item, ',')) {
        if (i >= 4) throw CLI::ValidationError("--sv", "expected exactly 4 values");
        vals[i++] = std::stod(item);
    }
    if (i != 4) throw CLI::ValidationError("--sv", "expected exactly 4 values");
    try {
        return SVSet::checked(vals, spec);
    } catch (const std::invalid_argument& e) {
        throw CLI::ValidationError("--sv", e.what());
    }
}

void apply_thread_cap() {
#ifdef _OPENMP
    if (const char* env = std::getenv("RAZER_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) omp_set_num_threads(n);
    }
#endif
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << text;
}

int cmd_quantize(const std::string& input, const std::string& dtype_str, int group_size,
                 const std::string& sv_arg, double clip, const std::string& output,
                 std::uint64_t seed, int budget) {
    const Dtype dtype = parse_dtype(dtype_str);
    const Tensor t = read_nt(input);

    SVSet sv = default_sv_set();
    if (is_razer(dtype)) {
        const DatatypeSpec& spec = razer_spec_of(dtype);
        if (sv_arg == "auto") {
            LayerSpec layer;
            layer.name = input;
            layer.weights = t;
            const SearchRange range = derive_search_range(t.data, spec, group_size);
            sv = search_layer_svset(layer, spec, range, budget, seed, group_size).set;
        } else {
            sv = parse_sv_list(sv_arg, spec);
        }
    }

    if (t.dims.back() % static_cast<std::size_t>(group_size) != 0)
        std::cerr << "warning: inner dim " << t.dims.back() << " not divisible by group size "
                  << group_size << "; final group padded\n";

    QuantConfig cfg;
    cfg.dtype = dtype;
    cfg.group_size = group_size;
    cfg.clip_alpha = clip;
    cfg.clip_beta = clip;
    const QuantizedTensor qt = quantize_tensor(t.data, t.dims, cfg, sv);
    write_container(qt, output);

    const std::vector<double> that = dequantize_tensor(qt);
    const double meta_bits = is_razer(dtype) ? 2.0 : static_cast<double>(code_bits(dtype));
    nlohmann::json summary{
        {"input", input},
        {"output", output},
        {"dtype", dtype_str},
        {"group_size", group_size},
        {"mse", mse(t.data, that)},
        {"effective_bits", effective_bits(code_bits(dtype), group_size, 8.0, meta_bits)},
    };
    if (is_razer(dtype))
        summary["sv"] = std::vector<double>(sv.values.begin(), sv.values.end());
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_dequantize(const std::string& input, const std::string& output) {
    const QuantizedTensor qt = read_container(input);
    Tensor t;
    t.dims = qt.dims;
    t.data = dequantize_tensor(qt);
    write_nt(t, output);
    return 0;
}

int cmd_sweep_sv(const std::string& input, const std::string& dtype_str, const std::string& range,
                 double step, int group_size, const std::string& csv_path) {
    const Dtype dtype = parse_dtype(dtype_str);
    if (!is_razer(dtype)) throw CLI::ValidationError("--dtype", "sweep requires a RaZeR dtype");
    const DatatypeSpec& spec = razer_spec_of(dtype);
    const Tensor t = read_nt(input);

    double lo = 0.0, hi = 0.0;
    if (std::sscanf(range.c_str(), "%lf:%lf", &lo, &hi) != 2 || lo >= hi || lo <= 0.0)
        throw CLI::ValidationError("--range", "expected a:b with 0 < a < b");
    std::vector<double> mags;
    for (double m = lo; m <= hi + 1e-9; m += step) mags.push_back(m);

    const SweepResult sweep = sweep_sv_error(t.data, spec, mags, group_size);
    // Normalized by the plain-FP baseline; degenerate (grid-exact) tensors
    // report raw zeros.
    const double norm = sweep.fp_baseline > 0.0 ? sweep.fp_baseline : 1.0;
    std::ostringstream csv;
    csv << "sv_magnitude,razer_err,fp_baseline_err,int_baseline_err\n";
    for (const SweepPoint& p : sweep.points) {
        csv << p.magnitude << "," << p.pair_err / norm << "," << sweep.fp_baseline / norm << ","
            << sweep.int_baseline / norm << "\n";
    }
    write_text(csv_path, csv.str());
    return 0;
}

int cmd_calibrate(const std::string& layers_dir, const std::string& dtype_str, int budget,
                  std::uint64_t seed, const std::string& out_path, int group_size) {
    const Dtype dtype = parse_dtype(dtype_str);
    if (!is_razer(dtype))
        throw CLI::ValidationError("--dtype", "calibration requires a RaZeR dtype");
    const DatatypeSpec& spec = razer_spec_of(dtype);

    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(layers_dir)) {
        if (entry.path().extension() == ".nt") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("no .nt layer files in " + layers_dir);

    std::vector<LayerSpec> layers;
    for (const auto& f : files) {
        LayerSpec layer;
        layer.name = f.filename().string();
        layer.weights = read_nt(f.string());
        layers.push_back(std::move(layer));
    }
    const ModelCalibration cal =
        calibrate_model(layers, spec, spec, budget, seed, group_size, group_size);
    write_text(out_path, calibration_report_json(cal) + "\n");
    return 0;
}

int cmd_kv_sim(int tokens, int dim, int buffer, int group_size, const std::string& dtype_str,
               const std::string& csv_path, std::uint64_t seed) {
    KvConfig cfg;
    cfg.group_size = group_size;
    cfg.buffer_capacity = static_cast<std::size_t>(buffer);
    if (dtype_str == "fp16") {
        cfg.dtype = std::nullopt;  // full-precision passthrough
    } else {
        cfg.dtype = parse_dtype(dtype_str);
    }
    const auto d = static_cast<std::size_t>(dim);
    KvCacheState state(d, cfg, default_sv_set());

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<double> full_keys, full_values;
    std::vector<double> q(d);
    for (double& v : q) v = dist(rng);

    std::ostringstream csv;
    csv << "step,flush_events,buffered,attention_err\n";
    for (int step = 1; step <= tokens; ++step) {
        std::vector<double> k(d), v(d);
        for (double& x : k) x = dist(rng);
        for (double& x : v) x = dist(rng);
        full_keys.insert(full_keys.end(), k.begin(), k.end());
        full_values.insert(full_values.end(), v.begin(), v.end());
        state.append(k, v);

        const std::vector<double> out = state.attention(q);
        const std::vector<double> oracle =
            attention_full(full_keys, full_values, static_cast<std::size_t>(step), d, q);
        double err = 0.0;
        for (std::size_t i = 0; i < d; ++i) err += (out[i] - oracle[i]) * (out[i] - oracle[i]);
        csv << step << "," << state.flush_events() << "," << state.buffered_tokens() << ","
            << std::sqrt(err) << "\n";
    }
    write_text(csv_path, csv.str());
    return 0;
}

int cmd_bench_gemv(const std::string& shapes_str, int reps, int group_size,
                   const std::string& csv_path, std::uint64_t seed) {
    std::vector<std::pair<std::size_t, std::size_t>> shapes;
    std::stringstream ss(shapes_str);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t n = 0, k = 0;
        if (std::sscanf(item.c_str(), "%zux%zu", &n, &k) != 2 || n == 0 || k == 0)
            throw CLI::ValidationError("--shapes", "expected NxK[,NxK...]");
        shapes.emplace_back(n, k);
    }
    if (shapes.empty()) throw CLI::ValidationError("--shapes", "no shapes given");
    const std::vector<BenchRow> rows = bench_gemv(shapes, reps, group_size, seed);
    write_text(csv_path, bench_csv(rows));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    apply_thread_cap();
    CLI::App app{"RaZeR low-bit quantization toolkit"};
    app.require_subcommand(1);

    std::string input, output, dtype = "fp4rzr", sv = "auto", range = "2:14", csv_path,
                layers_dir, shapes;
    int group_size = 128, budget = 200, tokens = 64, dim = 64, buffer = 64, reps = 5;
    double clip = 1.0, step = 1.0;
    std::uint64_t seed = 0;

    auto* q = app.add_subcommand("quantize", "Quantize an .nt tensor into an .rzr container");
    q->add_option("--input", input)->required();
    q->add_option("--output", output)->required();
    q->add_option("--dtype", dtype, "int4|int3|fp4rzr|fp3rzr");
    q->add_option("--group-size", group_size)->check(CLI::Range(2, 1 << 20));
    q->add_option("--sv", sv, "auto or v1,v2,v3,v4");
    q->add_option("--clip", clip)->check(CLI::Range(1e-6, 1.0));
    q->add_option("--budget", budget, "sv auto-calibration evaluation budget");
    q->add_option("--seed", seed);

    auto* dq = app.add_subcommand("dequantize", "Expand an .rzr container back into .nt");
    dq->add_option("--input", input)->required();
    dq->add_option("--output", output)->required();

    auto* sw = app.add_subcommand("sweep-sv", "Per-magnitude sv error curve (CSV)");
    sw->add_option("--input", input)->required();
    sw->add_option("--dtype", dtype);
    sw->add_option("--range", range, "a:b magnitudes");
    sw->add_option("--step", step)->check(CLI::Range(1e-6, 100.0));
    sw->add_option("--group-size", group_size);
    sw->add_option("--csv", csv_path)->required();

    auto* cal = app.add_subcommand("calibrate", "Search special-value sets over layer files");
    cal->add_option("--layers", layers_dir)->required();
    cal->add_option("--dtype", dtype);
    cal->add_option("--budget", budget)->check(CLI::Range(20, 1 << 20));
    cal->add_option("--seed", seed);
    cal->add_option("--group-size", group_size);
    cal->add_option("--out", output)->required();

    auto* kv = app.add_subcommand("kv-sim", "KV-cache buffering simulation (CSV)");
    kv->add_option("--tokens", tokens)->check(CLI::Range(1, 1 << 20));
    kv->add_option("--dim", dim)->check(CLI::Range(1, 1 << 16));
    kv->add_option("--buffer", buffer)->check(CLI::Range(1, 1 << 16));
    kv->add_option("--group-size", group_size);
    kv->add_option("--dtype", dtype, "fp16|int4|int3|fp4rzr|fp3rzr");
    kv->add_option("--seed", seed);
    kv->add_option("--csv", csv_path)->required();

    auto* bench = app.add_subcommand("bench-gemv", "Fused vs reference GEMV timing (CSV)");
    bench->add_option("--shapes", shapes, "NxK[,NxK...]")->required();
    bench->add_option("--reps", reps)->check(CLI::Range(3, 10000));
    bench->add_option("--group-size", group_size);
    bench->add_option("--seed", seed);
    bench->add_option("--csv", csv_path)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (q->parsed())
            return cmd_quantize(input, dtype, group_size, sv, clip, output, seed, budget);
        if (dq->parsed()) return cmd_dequantize(input, output);
        if (sw->parsed()) return cmd_sweep_sv(input, dtype, range, step, group_size, csv_path);
        if (cal->parsed())
            return cmd_calibrate(layers_dir, dtype, budget, seed, output, group_size);
        if (kv->parsed())
            return cmd_kv_sim(tokens, dim, buffer, group_size, dtype, csv_path, seed);
        if (bench->parsed()) return cmd_bench_gemv(shapes, reps, group_size, csv_path, seed);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
