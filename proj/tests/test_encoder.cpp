#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <vector>

#include "courtseq/encoder.hpp"
#include "courtseq/optimizer.hpp"
#include "courtseq/rng.hpp"

using namespace courtseq;

namespace {

Series random_series(Rng& rng, std::size_t channels, std::size_t samples) {
  Series s(channels, samples);
  for (double& v : s.data) v = rng.uniform(-2.0, 2.0);
  return s;
}

EncoderConfig small_cfg() {
  EncoderConfig cfg;
  cfg.in_channels = 6;
  cfg.hidden_channels = 5;
  cfg.depth = 2;
  cfg.kernel_size = 3;
  cfg.out_dim = 4;
  return cfg;
}

void zero_all(EncoderParams& p) {
  for (const TensorView& v : tensor_views(p)) std::fill(v.data, v.data + v.size, 0.0);
}

// guarded relative error: relative for healthy magnitudes, absolute (scaled by
// the gradient's own magnitude) near zero
double rel_err(double a, double b, double gmax) {
  const double denom = std::max({std::fabs(a), std::fabs(b), 1e-3 * gmax, 1e-12});
  return std::fabs(a - b) / denom;
}

}  // namespace

TEST_CASE("receptive field covers the default window") {
  CHECK(receptive_field(EncoderConfig{}) == 31);  // 1 + 2*(1+2+4+8)
  EncoderConfig shallow;
  shallow.depth = 2;
  CHECK(receptive_field(shallow) == 7);
}

TEST_CASE("init_params: deterministic, zero biases, gain equals row norm") {
  const EncoderConfig cfg = small_cfg();
  EncoderParams a = init_params(cfg, 42);
  EncoderParams b = init_params(cfg, 42);
  EncoderParams c = init_params(cfg, 43);

  const auto va = tensor_views(a);
  const auto vb = tensor_views(b);
  REQUIRE(va.size() == vb.size());
  bool all_equal = true;
  for (std::size_t i = 0; i < va.size(); ++i) {
    for (std::size_t k = 0; k < va[i].size; ++k) {
      if (va[i].data[k] != vb[i].data[k]) all_equal = false;
    }
  }
  CHECK(all_equal);

  bool differs = false;
  const auto vc = tensor_views(c);
  for (std::size_t i = 0; i < va.size() && !differs; ++i) {
    for (std::size_t k = 0; k < va[i].size; ++k) {
      if (va[i].data[k] != vc[i].data[k]) {
        differs = true;
        break;
      }
    }
  }
  CHECK(differs);

  for (const BlockParams& blk : a.blocks) {
    for (const double bias : blk.bias) CHECK(bias == 0.0);
    for (std::size_t oc = 0; oc < blk.v.rows; ++oc) {
      double sq = 0.0;
      for (std::size_t i = 0; i < blk.v.cols; ++i) sq += blk.v.at(oc, i) * blk.v.at(oc, i);
      const double norm = std::sqrt(sq);
      CHECK(std::fabs(blk.gain[oc] - norm) <= 1e-12 * std::max(1.0, norm));
    }
  }
  for (const double bias : a.head_b) CHECK(bias == 0.0);
}

TEST_CASE("forward_sequence: causality under random perturbations") {
  Rng rng(111);
  const EncoderConfig cfg = small_cfg();
  const EncoderParams params = init_params(cfg, 5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t T = 30;
    Series x = random_series(rng, cfg.in_channels, T);
    const Series base = forward_sequence(params, x);
    const std::size_t t_perturb = 1 + rng.below(T - 1);
    const std::size_t ch = rng.below(cfg.in_channels);
    x.at(ch, t_perturb) += rng.uniform(0.5, 2.0);
    const Series bumped = forward_sequence(params, x);
    for (std::size_t c = 0; c < base.channels; ++c) {
      for (std::size_t t = 0; t < t_perturb; ++t) {
        CHECK(base.at(c, t) == bumped.at(c, t));  // bit-identical
      }
    }
  }
}

TEST_CASE("forward_sequence: all-zero params give all-zero hidden") {
  Rng rng(2);
  const EncoderConfig cfg = small_cfg();
  EncoderParams params = init_params(cfg, 1);
  zero_all(params);
  const Series x = random_series(rng, cfg.in_channels, 25);
  const Series hidden = forward_sequence(params, x);
  for (const double v : hidden.data) CHECK(v == 0.0);
  const std::vector<double> emb = encode(params, x);
  for (const double v : emb) CHECK(v == 0.0);  // equals the (zero) head bias
}

TEST_CASE("single identity-tap block reduces to leaky ReLU") {
  EncoderConfig cfg;
  cfg.in_channels = 1;
  cfg.hidden_channels = 1;
  cfg.depth = 1;
  cfg.kernel_size = 3;
  cfg.out_dim = 1;
  cfg.residual = false;
  EncoderParams params = init_params(cfg, 0);
  params.blocks[0].v.at(0, 0) = 0.0;
  params.blocks[0].v.at(0, 1) = 0.0;
  params.blocks[0].v.at(0, 2) = 1.0;  // last tap multiplies the current sample
  params.blocks[0].gain[0] = 1.0;
  params.blocks[0].bias[0] = 0.0;

  Rng rng(9);
  const Series x = random_series(rng, 1, 16);
  const Series hidden = forward_sequence(params, x);
  for (std::size_t t = 0; t < 16; ++t) {
    const double v = x.at(0, t);
    const double expect = v > 0.0 ? v : cfg.leaky_slope * v;
    CHECK(hidden.at(0, t) == doctest::Approx(expect).epsilon(1e-15));
  }
}

TEST_CASE("length preservation for T in {1, W, 2W}") {
  Rng rng(3);
  const EncoderConfig cfg = small_cfg();
  const EncoderParams params = init_params(cfg, 7);
  for (const std::size_t T : {std::size_t{1}, std::size_t{25}, std::size_t{50}}) {
    const Series x = random_series(rng, cfg.in_channels, T);
    const Series hidden = forward_sequence(params, x);
    CHECK(hidden.samples == T);
    CHECK(hidden.channels == cfg.hidden_channels);
  }
}

TEST_CASE("embedding size is independent of input length") {
  Rng rng(4);
  const EncoderConfig cfg = small_cfg();
  const EncoderParams params = init_params(cfg, 8);
  for (const std::size_t T : {std::size_t{25}, std::size_t{40}}) {
    CHECK(encode(params, random_series(rng, cfg.in_channels, T)).size() == cfg.out_dim);
  }
}

TEST_CASE("constant series: embeddings invariant to time length") {
  const EncoderConfig cfg = small_cfg();
  const EncoderParams params = init_params(cfg, 12);
  Series x1(cfg.in_channels, 10), x2(cfg.in_channels, 30);
  for (std::size_t c = 0; c < cfg.in_channels; ++c) {
    for (std::size_t t = 0; t < x1.samples; ++t) x1.at(c, t) = 0.7 * static_cast<double>(c);
    for (std::size_t t = 0; t < x2.samples; ++t) x2.at(c, t) = 0.7 * static_cast<double>(c);
  }
  // max pooling over a (eventually) constant response: the steady-state values
  // dominate both ways once the receptive field fills
  const auto e1 = encode(params, x1);
  const auto e2 = encode(params, x2);
  for (std::size_t j = 0; j < e1.size(); ++j) CHECK(e1[j] == doctest::Approx(e2[j]).epsilon(1e-12));
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(77);
  const EncoderConfig configs[] = {small_cfg(), [] {
                                     EncoderConfig c;
                                     c.in_channels = 3;
                                     c.hidden_channels = 3;  // identity residual everywhere
                                     c.depth = 2;
                                     c.kernel_size = 2;
                                     c.out_dim = 5;
                                     return c;
                                   }()};
  for (const EncoderConfig& cfg : configs) {
    EncoderParams params = init_params(cfg, 21);
    const Series x = random_series(rng, cfg.in_channels, 8);
    std::vector<double> g_emb(cfg.out_dim);
    for (double& g : g_emb) g = rng.uniform(-1.0, 1.0);

    EncoderParams grads = zeros_like(params);
    const ForwardTape tape = encode_with_tape(params, x);
    accumulate_backward(params, tape, g_emb, grads);

    auto loss_of = [&](EncoderParams& p) {
      const std::vector<double> e = encode(p, x);
      double L = 0.0;
      for (std::size_t j = 0; j < e.size(); ++j) L += g_emb[j] * e[j];
      return L;
    };

    const auto pviews = tensor_views(params);
    auto gviews = tensor_views(grads);
    double gmax = 0.0;
    for (const auto& gv : gviews) {
      for (std::size_t k = 0; k < gv.size; ++k) gmax = std::max(gmax, std::fabs(gv.data[k]));
    }
    const double h = 1e-5;
    for (std::size_t i = 0; i < pviews.size(); ++i) {
      for (std::size_t k = 0; k < pviews[i].size; ++k) {
        const double saved = pviews[i].data[k];
        pviews[i].data[k] = saved + h;
        const double lp = loss_of(params);
        pviews[i].data[k] = saved - h;
        const double lm = loss_of(params);
        pviews[i].data[k] = saved;
        const double fd = (lp - lm) / (2.0 * h);
        CHECK(rel_err(gviews[i].data[k], fd, gmax) < 1e-4);
      }
    }
  }
}

TEST_CASE("gradient of an identity residual block has no projection entries") {
  EncoderConfig cfg;
  cfg.in_channels = 4;
  cfg.hidden_channels = 4;
  cfg.depth = 1;
  cfg.out_dim = 2;
  const EncoderParams params = init_params(cfg, 3);
  CHECK(params.blocks[0].proj.empty());  // matched channels, nothing to train
}

TEST_CASE("doubling the upstream gradient doubles every parameter gradient") {
  Rng rng(31);
  const EncoderConfig cfg = small_cfg();
  EncoderParams params = init_params(cfg, 15);
  const Series x = random_series(rng, cfg.in_channels, 12);
  std::vector<double> g1(cfg.out_dim), g2(cfg.out_dim);
  for (std::size_t j = 0; j < cfg.out_dim; ++j) {
    g1[j] = rng.uniform(-1.0, 1.0);
    g2[j] = 2.0 * g1[j];
  }
  EncoderParams grads1 = zeros_like(params);
  EncoderParams grads2 = zeros_like(params);
  const ForwardTape tape = encode_with_tape(params, x);
  accumulate_backward(params, tape, g1, grads1);
  accumulate_backward(params, tape, g2, grads2);
  const auto v1 = tensor_views(grads1);
  const auto v2 = tensor_views(grads2);
  for (std::size_t i = 0; i < v1.size(); ++i) {
    for (std::size_t k = 0; k < v1[i].size; ++k) {
      CHECK(v2[i].data[k] == doctest::Approx(2.0 * v1[i].data[k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("adam_step identities") {
  const EncoderConfig cfg = small_cfg();
  SUBCASE("zero gradient leaves parameters unchanged") {
    EncoderParams params = init_params(cfg, 4);
    const EncoderParams before = params;
    EncoderParams grads = zeros_like(params);
    AdamState st = make_adam_state(params);
    adam_step(params, grads, st, AdamConfig{});
    const auto va = tensor_views(params);
    auto vb = tensor_views(const_cast<EncoderParams&>(before));
    for (std::size_t i = 0; i < va.size(); ++i) {
      for (std::size_t k = 0; k < va[i].size; ++k) CHECK(va[i].data[k] == vb[i].data[k]);
    }
  }
  SUBCASE("first step from zero state moves each entry by about lr") {
    EncoderParams params = init_params(cfg, 4);
    const EncoderParams before = params;
    EncoderParams grads = zeros_like(params);
    for (const TensorView& v : tensor_views(grads)) std::fill(v.data, v.data + v.size, 0.5);
    AdamState st = make_adam_state(params);
    const AdamConfig acfg;
    adam_step(params, grads, st, acfg);
    const auto va = tensor_views(params);
    auto vb = tensor_views(const_cast<EncoderParams&>(before));
    for (std::size_t i = 0; i < va.size(); ++i) {
      for (std::size_t k = 0; k < va[i].size; ++k) {
        const double delta = vb[i].data[k] - va[i].data[k];
        // lr * (g/bc1) / (sqrt(g^2/bc2) + eps) == lr up to the eps correction
        CHECK(std::fabs(delta - acfg.lr) < 1e-9);
      }
    }
  }
  SUBCASE("two identical runs give identical states") {
    EncoderParams p1 = init_params(cfg, 4);
    EncoderParams p2 = init_params(cfg, 4);
    EncoderParams grads = zeros_like(p1);
    Rng rng(6);
    for (const TensorView& v : tensor_views(grads)) {
      for (std::size_t k = 0; k < v.size; ++k) v.data[k] = rng.uniform(-1, 1);
    }
    AdamState s1 = make_adam_state(p1);
    AdamState s2 = make_adam_state(p2);
    for (int step = 0; step < 5; ++step) {
      adam_step(p1, grads, s1, AdamConfig{});
      adam_step(p2, grads, s2, AdamConfig{});
    }
    const auto va = tensor_views(p1);
    const auto vb = tensor_views(p2);
    for (std::size_t i = 0; i < va.size(); ++i) {
      for (std::size_t k = 0; k < va[i].size; ++k) CHECK(va[i].data[k] == vb[i].data[k]);
    }
    CHECK(s1.t == s2.t);
  }
}

TEST_CASE("checkpoint round-trips exactly") {
  const EncoderConfig cfg = small_cfg();
  EncoderParams params = init_params(cfg, 99);
  const std::string path = "ckpt_roundtrip_tmp.ckpt";
  save_checkpoint(params, path);
  EncoderParams loaded = load_checkpoint(path);
  CHECK(loaded.cfg == params.cfg);
  const auto va = tensor_views(params);
  const auto vb = tensor_views(loaded);
  REQUIRE(va.size() == vb.size());
  for (std::size_t i = 0; i < va.size(); ++i) {
    REQUIRE(va[i].size == vb[i].size);
    for (std::size_t k = 0; k < va[i].size; ++k) CHECK(va[i].data[k] == vb[i].data[k]);
  }
  std::remove(path.c_str());
}

TEST_CASE("weight-norm consistency: effective weights recomputed from (g, v)") {
  // encode the same input through params and through a copy whose v rows are
  // rescaled arbitrarily; w = g*v/||v|| is scale-invariant in v
  Rng rng(55);
  const EncoderConfig cfg = small_cfg();
  EncoderParams params = init_params(cfg, 10);
  EncoderParams rescaled = params;
  for (BlockParams& b : rescaled.blocks) {
    for (std::size_t oc = 0; oc < b.v.rows; ++oc) {
      for (std::size_t i = 0; i < b.v.cols; ++i) b.v.at(oc, i) *= 3.0;
    }
  }
  const Series x = random_series(rng, cfg.in_channels, 20);
  const auto e1 = encode(params, x);
  const auto e2 = encode(rescaled, x);
  for (std::size_t j = 0; j < e1.size(); ++j) {
    CHECK(e1[j] == doctest::Approx(e2[j]).epsilon(1e-12));
  }
}
