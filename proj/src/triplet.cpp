#include "courtseq/triplet.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "courtseq/kernels.hpp"

namespace courtseq {

void TripletConfig::validate() const {
  if (k_negatives < 1) throw std::invalid_argument("TripletConfig: k_negatives must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("TripletConfig: batch_size must be >= 1");
}

Triplet sample_triplet(const std::vector<Series>& dataset, std::size_t i,
                       const TripletConfig& cfg, Rng& rng) {
  if (dataset.empty()) throw std::invalid_argument("sample_triplet: empty dataset");
  if (i >= dataset.size()) throw std::invalid_argument("sample_triplet: series index out of range");
  const std::size_t n = dataset.size();
  const std::size_t si = dataset[i].samples;
  if (si < 1) throw std::invalid_argument("sample_triplet: zero-length series");

  Triplet t;
  std::size_t s_pos, s_ref;
  if (cfg.fixed_length) {
    s_pos = si;
    s_ref = si;
    t.ref = {i, 0, s_ref};
    t.pos = {i, 0, s_pos};
  } else {
    s_pos = 1 + rng.below(si);
    s_ref = s_pos + rng.below(si - s_pos + 1);
    const std::size_t ref_start = rng.below(si - s_ref + 1);
    const std::size_t pos_start = ref_start + rng.below(s_ref - s_pos + 1);
    t.ref = {i, ref_start, s_ref};
    t.pos = {i, pos_start, s_pos};
  }

  t.negs.reserve(cfg.k_negatives);
  for (std::size_t k = 0; k < cfg.k_negatives; ++k) {
    std::size_t ik = rng.below(n);
    std::size_t s_neg;
    if (cfg.fixed_length) {
      std::size_t rejections = 0;
      while (dataset[ik].samples < s_pos) {
        if (++rejections > 1000) {
          throw std::runtime_error(
              "sample_triplet: no series long enough for fixed-length negatives");
        }
        ik = rng.below(n);
      }
      s_neg = s_pos;
    } else {
      s_neg = 1 + rng.below(dataset[ik].samples);
    }
    const std::size_t start = rng.below(dataset[ik].samples - s_neg + 1);
    t.negs.push_back({ik, start, s_neg});
  }
  return t;
}

namespace {

double softplus(double z) {
  // max(z,0) + log1p(exp(-|z|)); finite for any double
  return (z > 0.0 ? z : 0.0) + std::log1p(std::exp(-std::fabs(z)));
}

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_finite(const std::vector<double>& e, const char* who) {
  for (double v : e) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string("triplet_loss: non-finite ") + who);
  }
}

}  // namespace

double triplet_loss(const std::vector<double>& e_ref, const std::vector<double>& e_pos,
                    const std::vector<std::vector<double>>& e_negs) {
  const auto& K = kern::ops();
  const std::size_t d = e_ref.size();
  if (e_pos.size() != d) throw std::invalid_argument("triplet_loss: dimension mismatch");
  check_finite(e_ref, "anchor");
  check_finite(e_pos, "positive");
  double loss = softplus(-K.dot(e_ref.data(), e_pos.data(), d));
  for (const auto& e_neg : e_negs) {
    if (e_neg.size() != d) throw std::invalid_argument("triplet_loss: dimension mismatch");
    check_finite(e_neg, "negative");
    loss += softplus(K.dot(e_ref.data(), e_neg.data(), d));
  }
  return loss;
}

double triplet_loss_grad(const std::vector<double>& e_ref, const std::vector<double>& e_pos,
                         const std::vector<std::vector<double>>& e_negs,
                         std::vector<double>& g_ref, std::vector<double>& g_pos,
                         std::vector<std::vector<double>>& g_negs) {
  const auto& K = kern::ops();
  const std::size_t d = e_ref.size();
  if (e_pos.size() != d) throw std::invalid_argument("triplet_loss_grad: dimension mismatch");
  check_finite(e_ref, "anchor");
  check_finite(e_pos, "positive");
  g_ref.assign(d, 0.0);
  g_pos.assign(d, 0.0);
  g_negs.assign(e_negs.size(), std::vector<double>(d, 0.0));

  const double dot_pos = K.dot(e_ref.data(), e_pos.data(), d);
  double loss = softplus(-dot_pos);
  // d/dz softplus(-z) = -sigmoid(-z)
  const double w_pos = -sigmoid(-dot_pos);
  K.axpy(d, w_pos, e_pos.data(), g_ref.data());
  K.axpy(d, w_pos, e_ref.data(), g_pos.data());

  for (std::size_t k = 0; k < e_negs.size(); ++k) {
    if (e_negs[k].size() != d) throw std::invalid_argument("triplet_loss_grad: dimension mismatch");
    check_finite(e_negs[k], "negative");
    const double dot_neg = K.dot(e_ref.data(), e_negs[k].data(), d);
    loss += softplus(dot_neg);
    const double w_neg = sigmoid(dot_neg);
    K.axpy(d, w_neg, e_negs[k].data(), g_ref.data());
    K.axpy(d, w_neg, e_ref.data(), g_negs[k].data());
  }
  return loss;
}

namespace {

void zero_params(EncoderParams& g) {
  for (const TensorView& v : tensor_views(g)) std::fill(v.data, v.data + v.size, 0.0);
}

}  // namespace

TrainResult train_from(const std::vector<Series>& dataset, EncoderParams params,
                       const TripletConfig& cfg) {
  cfg.validate();
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
  for (const Series& s : dataset) {
    if (s.channels != params.cfg.in_channels) {
      throw std::invalid_argument("train: series channel count does not match encoder config");
    }
    if (cfg.fixed_length && s.samples != dataset.front().samples) {
      throw std::invalid_argument("train: fixed-length mode requires equal series lengths");
    }
  }

  TrainResult result;
  AdamState adam = make_adam_state(params);
  EncoderParams batch_grads = zeros_like(params);
  Rng rng(cfg.seed);
  const auto& K = kern::ops();
  const std::size_t n = dataset.size();

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t_start = std::chrono::steady_clock::now();
    double epoch_loss = 0.0;
    std::size_t in_batch = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const Triplet trip = sample_triplet(dataset, i, cfg, rng);

      const Series ref_x = subseries(dataset[trip.ref.series], trip.ref.start, trip.ref.length);
      const ForwardTape ref_tape = encode_with_tape(params, ref_x);

      // the positive shares the anchor's forward pass when it spans the
      // exact same range (always true in fixed-length mode)
      const bool shared_pos = trip.pos.series == trip.ref.series &&
                              trip.pos.start == trip.ref.start &&
                              trip.pos.length == trip.ref.length;
      ForwardTape pos_tape;
      if (!shared_pos) {
        const Series pos_x =
            subseries(dataset[trip.pos.series], trip.pos.start, trip.pos.length);
        pos_tape = encode_with_tape(params, pos_x);
      }
      const std::vector<double>& e_pos = shared_pos ? ref_tape.embedding : pos_tape.embedding;

      std::vector<ForwardTape> neg_tapes;
      neg_tapes.reserve(trip.negs.size());
      std::vector<std::vector<double>> e_negs;
      for (const SubseriesRef& nr : trip.negs) {
        const Series neg_x = subseries(dataset[nr.series], nr.start, nr.length);
        neg_tapes.push_back(encode_with_tape(params, neg_x));
        e_negs.push_back(neg_tapes.back().embedding);
      }

      std::vector<double> g_ref, g_pos;
      std::vector<std::vector<double>> g_negs;
      const double loss =
          triplet_loss_grad(ref_tape.embedding, e_pos, e_negs, g_ref, g_pos, g_negs);
      if (!std::isfinite(loss)) {
        throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                 ", series " + std::to_string(i));
      }
      epoch_loss += loss;

      if (shared_pos) {
        K.axpy(g_ref.size(), 1.0, g_pos.data(), g_ref.data());
        accumulate_backward(params, ref_tape, g_ref, batch_grads);
      } else {
        accumulate_backward(params, ref_tape, g_ref, batch_grads);
        accumulate_backward(params, pos_tape, g_pos, batch_grads);
      }
      for (std::size_t k = 0; k < neg_tapes.size(); ++k) {
        accumulate_backward(params, neg_tapes[k], g_negs[k], batch_grads);
      }

      ++in_batch;
      if (in_batch == cfg.batch_size || i + 1 == n) {
        for (const TensorView& v : tensor_views(batch_grads)) {
          K.scale(v.size, 1.0 / static_cast<double>(in_batch), v.data);
        }
        adam_step(params, batch_grads, adam, cfg.adam);
        zero_params(batch_grads);
        in_batch = 0;
      }
    }
    const auto t_end = std::chrono::steady_clock::now();
    result.epoch_mean_loss.push_back(epoch_loss / static_cast<double>(n));
    result.epoch_wall_seconds.push_back(
        std::chrono::duration<double>(t_end - t_start).count());
  }
  result.params = std::move(params);
  return result;
}

TrainResult train(const std::vector<Series>& dataset, const EncoderConfig& encoder_cfg,
                  const TripletConfig& cfg, std::uint64_t init_seed) {
  return train_from(dataset, init_params(encoder_cfg, init_seed), cfg);
}

}  // namespace courtseq
