#include "courtseq/optimizer.hpp"

#include <cmath>
#include <stdexcept>

#include "courtseq/kernels.hpp"

namespace courtseq {

AdamState make_adam_state(const EncoderParams& like) {
  return AdamState{zeros_like(like), zeros_like(like), 0};
}

void adam_step(EncoderParams& params, const EncoderParams& grads, AdamState& state,
               const AdamConfig& cfg) {
  auto pv = tensor_views(params);
  auto gv = tensor_views(const_cast<EncoderParams&>(grads));
  auto mv = tensor_views(state.m);
  auto vv = tensor_views(state.v);
  if (pv.size() != gv.size() || pv.size() != mv.size() || pv.size() != vv.size()) {
    throw std::invalid_argument("adam_step: tensor count mismatch");
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  const auto& K = kern::ops();
  for (std::size_t i = 0; i < pv.size(); ++i) {
    if (pv[i].size != gv[i].size || pv[i].size != mv[i].size || pv[i].size != vv[i].size) {
      throw std::invalid_argument("adam_step: tensor shape mismatch");
    }
    K.adam_update(pv[i].size, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps, bc1, bc2, gv[i].data,
                  pv[i].data, mv[i].data, vv[i].data);
  }
}

}  // namespace courtseq
