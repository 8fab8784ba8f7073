#pragma once

#include <cstdint>
#include <vector>

#include "courtseq/common.hpp"
#include "courtseq/encoder.hpp"
#include "courtseq/optimizer.hpp"
#include "courtseq/rng.hpp"

namespace courtseq {

struct TripletConfig {
  std::size_t k_negatives = 5;
  /// On: anchors, positives and negatives all span the full series (the
  /// equal-length fast path). Off: the general variable-length sampling.
  bool fixed_length = true;
  std::size_t epochs = 10;
  std::size_t batch_size = 16;
  std::uint64_t seed = 1;
  AdamConfig adam;

  void validate() const;
};

struct SubseriesRef {
  std::size_t series = 0;
  std::size_t start = 0;
  std::size_t length = 0;
};

/// One sampled tuple: positive range nested in the anchor range, anchor range
/// inside its series, each negative inside its own series.
struct Triplet {
  SubseriesRef ref;
  SubseriesRef pos;
  std::vector<SubseriesRef> negs;
};

/// Draws the tuple for series i. Variable-length mode: s_pos uniform in
/// [1, s_i], s_ref uniform in [s_pos, s_i], the anchor uniform among length-
/// s_ref subseries of y_i, the positive uniform among length-s_pos subseries
/// of the anchor, and each negative from a uniformly chosen series with
/// uniform length in [1, size]. Fixed-length mode pins every length to the
/// full series and resamples negatives whose source is shorter than needed
/// (at most 1000 rejections before erroring out).
Triplet sample_triplet(const std::vector<Series>& dataset, std::size_t i,
                       const TripletConfig& cfg, Rng& rng);

/// -log sigmoid(e_ref . e_pos) - sum_k log sigmoid(-e_ref . e_neg_k),
/// evaluated through softplus so huge dot products stay finite.
double triplet_loss(const std::vector<double>& e_ref, const std::vector<double>& e_pos,
                    const std::vector<std::vector<double>>& e_negs);

/// Loss plus gradients with respect to each embedding (overwritten).
double triplet_loss_grad(const std::vector<double>& e_ref, const std::vector<double>& e_pos,
                         const std::vector<std::vector<double>>& e_negs,
                         std::vector<double>& g_ref, std::vector<double>& g_pos,
                         std::vector<std::vector<double>>& g_negs);

struct TrainResult {
  EncoderParams params;
  std::vector<double> epoch_mean_loss;
  std::vector<double> epoch_wall_seconds;
};

/// Unsupervised epochs over the dataset: one triplet per series per epoch,
/// losses averaged over mini-batches of batch_size before each Adam step.
/// Labels are never consulted. Deterministic per (init_seed, cfg.seed).
TrainResult train(const std::vector<Series>& dataset, const EncoderConfig& encoder_cfg,
                  const TripletConfig& cfg, std::uint64_t init_seed);

/// Same loop starting from existing parameters (0 epochs returns them as-is).
TrainResult train_from(const std::vector<Series>& dataset, EncoderParams params,
                       const TripletConfig& cfg);

}  // namespace courtseq
