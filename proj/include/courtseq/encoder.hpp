#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "courtseq/common.hpp"

namespace courtseq {

struct EncoderConfig {
  std::size_t in_channels = 110;
  std::size_t hidden_channels = 40;
  std::size_t depth = 4;  // conv blocks, block i dilated by 2^i
  std::size_t kernel_size = 3;
  std::size_t out_dim = 64;
  double leaky_slope = 0.01;
  bool residual = true;

  void validate() const;
  bool operator==(const EncoderConfig&) const = default;
};

/// Input steps visible to one output step: 1 + (k-1) * (2^depth - 1).
std::size_t receptive_field(const EncoderConfig& cfg);

/// One dilated causal conv block. The conv weight is weight-normalized: the
/// effective row for output channel oc is gain[oc] * v[oc] / ||v[oc]||, with
/// the norm taken over that row's in_channels * kernel_size entries. The
/// residual path is the identity when channel counts match, otherwise the
/// learned 1x1 projection in proj.
struct BlockParams {
  Mat v;                     // C_out x (C_in * K), direction
  std::vector<double> gain;  // C_out
  std::vector<double> bias;  // C_out
  Mat proj;                  // C_out x C_in; empty for identity residual
};

struct EncoderParams {
  EncoderConfig cfg;
  std::vector<BlockParams> blocks;
  Mat head_w;  // out_dim x hidden_channels
  std::vector<double> head_b;
};

/// Same shapes, all values zero. Doubles as the gradient container.
EncoderParams zeros_like(const EncoderParams& p);

/// Flat views over every tensor, in a fixed order (per block: v, gain, bias,
/// proj; then head_w, head_b). Used by the optimizer and by gradient checks.
struct TensorView {
  double* data;
  std::size_t size;
};
std::vector<TensorView> tensor_views(EncoderParams& p);
std::size_t parameter_count(const EncoderParams& p);

/// v entries uniform in [-sqrt(1/fan_in), sqrt(1/fan_in)]; gains start at the
/// row norm of v so the initial effective weights equal v; biases zero.
EncoderParams init_params(const EncoderConfig& cfg, std::uint64_t seed);

/// Stack of causal blocks; output length equals input length and hidden[:, t]
/// never depends on x[:, t'] for t' > t.
Series forward_sequence(const EncoderParams& p, const Series& x);

/// Per-channel max over time of forward_sequence, then the affine head.
std::vector<double> encode(const EncoderParams& p, const Series& x);

/// Activations retained for backward.
struct ForwardTape {
  Series input;
  std::vector<Series> pre;   // conv output per block, before the nonlinearity
  std::vector<Series> out;   // block output per block
  std::vector<double> pooled;
  std::vector<std::size_t> pool_index;  // earliest maximizing time per channel
  std::vector<double> embedding;
};

ForwardTape encode_with_tape(const EncoderParams& p, const Series& x);

/// Accumulates d(loss)/d(params) into grads given d(loss)/d(embedding).
/// Max-pool routes gradient to the earliest maximizing index.
void accumulate_backward(const EncoderParams& p, const ForwardTape& tape,
                         const std::vector<double>& g_embedding, EncoderParams& grads);

// Versioned binary checkpoint; round-trips exactly.
void save_checkpoint(const EncoderParams& p, const std::string& path);
EncoderParams load_checkpoint(const std::string& path);

}  // namespace courtseq
