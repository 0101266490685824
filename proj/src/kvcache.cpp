// SPDX-License-Identifier: Apache-2.0
#include "razer/kvcache.hpp"

#include <cmath>
#include <stdexcept>

namespace razer {
namespace {

const DatatypeSpec& razer_spec(Dtype d) { return d == Dtype::Fp4Rzr ? fp4_grid() : fp3_grid(); }

}  // namespace

KvCacheState::KvCacheState(std::size_t dim, const KvConfig& config, const SVSet& sv_set)
    : dim_(dim), config_(config), sv_set_(sv_set) {
    if (dim == 0) throw std::invalid_argument("KvCacheState: zero hidden dim");
    if (config.buffer_capacity == 0) throw std::invalid_argument("KvCacheState: n_b must be >= 1");
}

std::vector<QuantizedGroup> KvCacheState::quantize_token(std::span<const double> vec) const {
    const auto g = static_cast<std::size_t>(config_.group_size);
    std::vector<QuantizedGroup> groups;
    for (std::size_t off = 0; off < dim_; off += g) {
        const std::span<const double> slice = vec.subspan(off, std::min(g, dim_ - off));
        switch (*config_.dtype) {
            case Dtype::Int4:
                groups.push_back(quantize_group_int(slice, 4));
                break;
            case Dtype::Int3:
                groups.push_back(quantize_group_int(slice, 3));
                break;
            case Dtype::Fp4Rzr:
            case Dtype::Fp3Rzr:
                groups.push_back(quantize_group_razer(slice, razer_spec(*config_.dtype), sv_set_));
                break;
        }
    }
    return groups;
}

void KvCacheState::dequantize_token(const std::vector<QuantizedGroup>& groups, std::size_t token,
                                    double* out) const {
    const auto g = static_cast<std::size_t>(config_.group_size);
    const std::size_t gpt = (dim_ + g - 1) / g;
    std::size_t off = 0;
    for (std::size_t i = 0; i < gpt; ++i) {
        const QuantizedGroup& q = groups[token * gpt + i];
        const std::vector<double> vals =
            std::holds_alternative<IntGroupParams>(q.params)
                ? dequantize_group_int(q)
                : dequantize_group_razer(q, razer_spec(*config_.dtype), sv_set_);
        for (double v : vals) out[off++] = v;
    }
}

void KvCacheState::append(std::span<const double> k_vec, std::span<const double> v_vec) {
    if (k_vec.size() != dim_ || v_vec.size() != dim_)
        throw std::invalid_argument("kv_append: dimension mismatch");
    key_buffer_.emplace_back(k_vec.begin(), k_vec.end());
    value_buffer_.emplace_back(v_vec.begin(), v_vec.end());
    ++total_tokens_;
    if (key_buffer_.size() == config_.buffer_capacity) flush();
}

void KvCacheState::flush() {
    if (!config_.dtype.has_value()) {
        // Passthrough mode still honors the block/buffer accounting: the
        // "block" keeps full precision via int-free storage of raw values.
        Block blk;
        blk.key_groups.reserve(0);
        blocks_.push_back(std::move(blk));
        // Raw tokens move into the passthrough store.
        for (std::size_t t = 0; t < key_buffer_.size(); ++t) {
            passthrough_keys_.push_back(key_buffer_[t]);
            passthrough_values_.push_back(value_buffer_[t]);
        }
        key_buffer_.clear();
        value_buffer_.clear();
        ++flush_events_;
        return;
    }
    Block blk;
    for (std::size_t t = 0; t < key_buffer_.size(); ++t) {
        std::vector<QuantizedGroup> kg = quantize_token(key_buffer_[t]);
        std::vector<QuantizedGroup> vg = quantize_token(value_buffer_[t]);
        blk.key_groups.insert(blk.key_groups.end(), kg.begin(), kg.end());
        blk.value_groups.insert(blk.value_groups.end(), vg.begin(), vg.end());
    }
    blocks_.push_back(std::move(blk));
    key_buffer_.clear();
    value_buffer_.clear();
    ++flush_events_;
}

void KvCacheState::materialize(std::vector<double>& keys, std::vector<double>& values) const {
    keys.assign(total_tokens_ * dim_, 0.0);
    values.assign(total_tokens_ * dim_, 0.0);
    std::size_t row = 0;
    const std::size_t nb = config_.buffer_capacity;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        for (std::size_t t = 0; t < nb; ++t) {
            if (!config_.dtype.has_value()) {
                const std::vector<double>& k = passthrough_keys_[b * nb + t];
                const std::vector<double>& v = passthrough_values_[b * nb + t];
                std::copy(k.begin(), k.end(), keys.begin() + static_cast<std::ptrdiff_t>(row * dim_));
                std::copy(v.begin(), v.end(),
                          values.begin() + static_cast<std::ptrdiff_t>(row * dim_));
            } else {
                dequantize_token(blocks_[b].key_groups, t, keys.data() + row * dim_);
                dequantize_token(blocks_[b].value_groups, t, values.data() + row * dim_);
            }
            ++row;
        }
    }
    for (std::size_t t = 0; t < key_buffer_.size(); ++t) {
        std::copy(key_buffer_[t].begin(), key_buffer_[t].end(),
                  keys.begin() + static_cast<std::ptrdiff_t>(row * dim_));
        std::copy(value_buffer_[t].begin(), value_buffer_[t].end(),
                  values.begin() + static_cast<std::ptrdiff_t>(row * dim_));
        ++row;
    }
}

std::vector<double> KvCacheState::attention(std::span<const double> q) const {
    if (q.size() != dim_) throw std::invalid_argument("kv_attention: dimension mismatch");
    if (total_tokens_ == 0) throw std::invalid_argument("kv_attention: empty cache");
    std::vector<double> keys, values;
    materialize(keys, values);
    return attention_full(keys, values, total_tokens_, dim_, q);
}

std::vector<double> attention_full(std::span<const double> keys, std::span<const double> values,
                                   std::size_t tokens, std::size_t dim,
                                   std::span<const double> q) {
    if (tokens == 0) throw std::invalid_argument("attention_full: no tokens");
    std::vector<double> scores(tokens);
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(dim));
    double max_score = -1e300;
    for (std::size_t t = 0; t < tokens; ++t) {
        double dot = 0.0;
        for (std::size_t i = 0; i < dim; ++i) dot += q[i] * keys[t * dim + i];
        scores[t] = dot * inv_sqrt_d;
        max_score = std::max(max_score, scores[t]);
    }
    double denom = 0.0;
    for (double& s : scores) {
        s = std::exp(s - max_score);
        denom += s;
    }
    std::vector<double> out(dim, 0.0);
    for (std::size_t t = 0; t < tokens; ++t) {
        const double w = scores[t] / denom;
        for (std::size_t i = 0; i < dim; ++i) out[i] += w * values[t * dim + i];
    }
    return out;
}

}  // namespace razer
