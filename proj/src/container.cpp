// SPDX-License-Identifier: Apache-2.0
#include "razer/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "razer/half.hpp"
#include "razer/pack.hpp"

namespace razer {
namespace {

class Writer {
   public:
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u16(std::uint16_t v) {
        u8(static_cast<std::uint8_t>(v));
        u8(static_cast<std::uint8_t>(v >> 8));
    }
    void u32(std::uint32_t v) {
        u16(static_cast<std::uint16_t>(v));
        u16(static_cast<std::uint16_t>(v >> 16));
    }
    void u64(std::uint64_t v) {
        u32(static_cast<std::uint32_t>(v));
        u32(static_cast<std::uint32_t>(v >> 32));
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

   private:
    std::vector<std::uint8_t> bytes_;
};

class Reader {
   public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }
    std::uint16_t u16() {
        const auto lo = u8();
        return static_cast<std::uint16_t>(lo | (u8() << 8));
    }
    std::uint32_t u32() {
        const std::uint32_t lo = u16();
        return lo | (static_cast<std::uint32_t>(u16()) << 16);
    }
    std::uint64_t u64() {
        const std::uint64_t lo = u32();
        return lo | (static_cast<std::uint64_t>(u32()) << 32);
    }
    float f32() { return std::bit_cast<float>(u32()); }
    bool exhausted() const { return pos_ == bytes_.size(); }

   private:
    void need(std::size_t n) {
        if (pos_ + n > bytes_.size()) throw DataError("container: truncated payload");
    }
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

bool is_int_dtype(Dtype d) { return d == Dtype::Int4 || d == Dtype::Int3; }
bool is_3bit(Dtype d) { return d == Dtype::Int3 || d == Dtype::Fp3Rzr; }

}  // namespace

std::vector<std::uint8_t> serialize_container(const QuantizedTensor& qt) {
    const Dtype dtype = qt.config.dtype;
    if (is_3bit(dtype) && qt.config.group_size != static_cast<int>(kFp3GroupSize))
        throw DataError("container: 3-bit payload requires group size 128");

    Writer w;
    w.u8('R');
    w.u8('Z');
    w.u8('R');
    w.u8('1');
    w.u16(kContainerVersion);
    w.u8(static_cast<std::uint8_t>(dtype));
    w.u32(static_cast<std::uint32_t>(qt.config.group_size));
    w.u8(static_cast<std::uint8_t>(qt.dims.size()));
    for (std::size_t d : qt.dims) w.u64(d);
    w.u32(static_cast<std::uint32_t>(qt.tail_len));
    for (double v : qt.sv_set.values) w.f32(static_cast<float>(v));

    for (const QuantizedGroup& g : qt.groups) {
        const double s = std::holds_alternative<IntGroupParams>(g.params)
                             ? std::get<IntGroupParams>(g.params).scale
                             : std::get<RzrGroupParams>(g.params).scale;
        w.u16(half_encode(s));
    }

    std::uint8_t acc = 0;
    for (std::size_t i = 0; i < qt.groups.size(); ++i) {
        int idx = 0;
        if (const auto* p = std::get_if<RzrGroupParams>(&qt.groups[i].params)) idx = p->sv_index;
        acc |= static_cast<std::uint8_t>(idx << (2 * (i % 4)));
        if (i % 4 == 3 || i + 1 == qt.groups.size()) {
            w.u8(acc);
            acc = 0;
        }
    }

    if (is_int_dtype(dtype)) {
        for (const QuantizedGroup& g : qt.groups)
            w.u8(static_cast<std::uint8_t>(std::get<IntGroupParams>(g.params).zero_point));
    }

    for (const QuantizedGroup& g : qt.groups) {
        if (is_3bit(dtype)) {
            const Fp3Planes p = pack_fp3(g.codes);
            for (std::uint64_t v : p.sign_plane) w.u64(v);
            for (std::uint64_t v : p.exp_hi_plane) w.u64(v);
            for (std::uint64_t v : p.exp_lo_plane) w.u64(v);
        } else {
            const PackedFp4Block b = pack_fp4(g.codes);
            for (std::uint32_t v : b.words) w.u32(v);
        }
    }
    return w.take();
}

QuantizedTensor parse_container(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    if (r.u8() != 'R' || r.u8() != 'Z' || r.u8() != 'R' || r.u8() != '1')
        throw DataError("container: bad magic");
    if (r.u16() != kContainerVersion) throw DataError("container: version mismatch");
    const std::uint8_t dt = r.u8();
    if (dt > 3) throw DataError("container: unknown dtype");
    const auto dtype = static_cast<Dtype>(dt);
    const std::uint32_t group_size = r.u32();
    if (group_size < 2) throw DataError("container: bad group size");
    const std::uint8_t ndim = r.u8();
    if (ndim == 0) throw DataError("container: zero-rank tensor");

    QuantizedTensor qt;
    qt.config.dtype = dtype;
    qt.config.group_size = static_cast<int>(group_size);
    for (std::uint8_t i = 0; i < ndim; ++i) qt.dims.push_back(r.u64());
    qt.tail_len = r.u32();
    if (qt.tail_len < 1 || qt.tail_len > group_size) throw DataError("container: bad tail_len");
    for (double& v : qt.sv_set.values) v = r.f32();

    const std::size_t inner = qt.dims.back();
    const std::size_t gpr = (inner + group_size - 1) / group_size;
    const std::size_t rows = qt.numel() / inner;
    const std::size_t n_groups = rows * gpr;
    if (is_3bit(dtype) && group_size != kFp3GroupSize)
        throw DataError("container: 3-bit payload requires group size 128");

    std::vector<double> scales(n_groups);
    for (double& s : scales) s = half_decode(r.u16());

    std::vector<int> sv_indices(n_groups, 0);
    for (std::size_t i = 0; i < n_groups; i += 4) {
        const std::uint8_t b = r.u8();
        for (std::size_t j = 0; j < 4 && i + j < n_groups; ++j)
            sv_indices[i + j] = (b >> (2 * j)) & 3;
    }

    std::vector<int> zero_points(n_groups, 0);
    if (is_int_dtype(dtype)) {
        for (int& z : zero_points) z = r.u8();
    }

    qt.groups.resize(n_groups);
    for (std::size_t i = 0; i < n_groups; ++i) {
        QuantizedGroup& g = qt.groups[i];
        if (is_3bit(dtype)) {
            Fp3Planes p;
            for (std::uint64_t& v : p.sign_plane) v = r.u64();
            for (std::uint64_t& v : p.exp_hi_plane) v = r.u64();
            for (std::uint64_t& v : p.exp_lo_plane) v = r.u64();
            g.codes = unpack_fp3(p);
        } else {
            PackedFp4Block b;
            b.count = group_size;
            b.words.resize((group_size + 7) / 8);
            for (std::uint32_t& v : b.words) v = r.u32();
            g.codes = unpack_fp4(b);
        }
        if (is_int_dtype(dtype)) {
            g.params = IntGroupParams{scales[i], zero_points[i], dtype == Dtype::Int4 ? 4 : 3};
        } else {
            g.params = RzrGroupParams{scales[i], sv_indices[i]};
        }
    }
    if (!r.exhausted()) throw DataError("container: trailing bytes");
    return qt;
}

void write_container(const QuantizedTensor& qt, const std::string& path) {
    const std::vector<std::uint8_t> bytes = serialize_container(qt);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

QuantizedTensor read_container(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return parse_container(bytes);
}

std::vector<std::uint8_t> serialize_nt(const Tensor& t, bool as_f16) {
    Writer w;
    w.u8('N');
    w.u8('T');
    w.u8('S');
    w.u8('R');
    w.u8(as_f16 ? 1 : 0);
    w.u8(static_cast<std::uint8_t>(t.dims.size()));
    for (std::size_t d : t.dims) w.u64(d);
    for (double v : t.data) {
        if (as_f16) {
            w.u16(half_encode(v));
        } else {
            w.f32(static_cast<float>(v));
        }
    }
    return w.take();
}

Tensor parse_nt(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    if (r.u8() != 'N' || r.u8() != 'T' || r.u8() != 'S' || r.u8() != 'R')
        throw DataError("nt: bad magic");
    const std::uint8_t dt = r.u8();
    if (dt > 1) throw DataError("nt: unknown dtype");
    const std::uint8_t ndim = r.u8();
    if (ndim == 0) throw DataError("nt: zero-rank tensor");
    Tensor t;
    for (std::uint8_t i = 0; i < ndim; ++i) t.dims.push_back(r.u64());
    t.data.resize(t.numel());
    for (double& v : t.data) v = dt == 1 ? half_decode(r.u16()) : static_cast<double>(r.f32());
    if (!r.exhausted()) throw DataError("nt: trailing bytes");
    return t;
}

void write_nt(const Tensor& t, const std::string& path, bool as_f16) {
    const std::vector<std::uint8_t> bytes = serialize_nt(t, as_f16);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

Tensor read_nt(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return parse_nt(bytes);
}

}  // namespace razer
