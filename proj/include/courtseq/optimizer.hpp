#pragma once

#include <cstdint>

#include "courtseq/encoder.hpp"

namespace courtseq {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moments mirroring the parameter shapes, plus step counter.
struct AdamState {
  EncoderParams m;
  EncoderParams v;
  std::uint64_t t = 0;
};

AdamState make_adam_state(const EncoderParams& like);

/// Standard bias-corrected Adam step. Deterministic; throws on shape mismatch.
void adam_step(EncoderParams& params, const EncoderParams& grads, AdamState& state,
               const AdamConfig& cfg);

}  // namespace courtseq
