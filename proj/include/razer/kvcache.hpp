// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "razer/quantize.hpp"

namespace razer {

struct KvConfig {
    std::optional<Dtype> dtype = Dtype::Fp4Rzr;  // nullopt = full-precision passthrough
    int group_size = 64;
    std::size_t buffer_capacity = 64;  // n_b
};

// Quantized token blocks behind a full-precision residual buffer. Tokens
// accumulate in the buffer; once it holds n_b of them the whole block is
// quantized (per-token groups along the hidden dim, per-group sv search by
// MSE) and the buffer empties.
class KvCacheState {
   public:
    KvCacheState(std::size_t dim, const KvConfig& config, const SVSet& sv_set);

    void append(std::span<const double> k_vec, std::span<const double> v_vec);

    // Softmax attention over dequantized blocks plus the buffered tokens.
    std::vector<double> attention(std::span<const double> q) const;

    // Dequantized + buffered tokens as row-major (tokens x dim) matrices.
    void materialize(std::vector<double>& keys, std::vector<double>& values) const;

    std::size_t total_tokens() const { return total_tokens_; }
    std::size_t buffered_tokens() const { return key_buffer_.size(); }
    std::size_t block_count() const { return blocks_.size(); }
    std::size_t flush_events() const { return flush_events_; }
    std::size_t dim() const { return dim_; }

   private:
    struct Block {
        // groups_per_token groups per token, tokens in append order
        std::vector<QuantizedGroup> key_groups;
        std::vector<QuantizedGroup> value_groups;
    };

    std::vector<QuantizedGroup> quantize_token(std::span<const double> vec) const;
    void dequantize_token(const std::vector<QuantizedGroup>& groups, std::size_t token,
                          double* out) const;
    void flush();

    std::size_t dim_;
    KvConfig config_;
    SVSet sv_set_;
    std::vector<std::vector<double>> key_buffer_;
    std::vector<std::vector<double>> value_buffer_;
    std::vector<Block> blocks_;
    std::vector<std::vector<double>> passthrough_keys_;
    std::vector<std::vector<double>> passthrough_values_;
    std::size_t total_tokens_ = 0;
    std::size_t flush_events_ = 0;
};

// Plain full-precision attention over row-major (tokens x dim) matrices;
// shared by the cache path and test oracles.
std::vector<double> attention_full(std::span<const double> keys, std::span<const double> values,
                                   std::size_t tokens, std::size_t dim,
                                   std::span<const double> q);

}  // namespace razer
