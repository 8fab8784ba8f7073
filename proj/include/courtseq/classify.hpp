#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "courtseq/common.hpp"
#include "courtseq/court.hpp"

namespace courtseq {

struct Split {
  std::vector<std::size_t> train_ids;  // sorted
  std::vector<std::size_t> test_ids;   // sorted; disjoint from train
  double fraction = 0.0;
  std::uint64_t seed = 0;
};

/// Uniform subset without replacement, |train| = round(fraction * n).
/// Throws when either side would be empty.
Split make_split(std::size_t n, double fraction, std::uint64_t seed);

/// Leakage-free variant: whole events land on one side. event_of[i] is the
/// source event of micro-event i; round(fraction * n_events) events train.
Split make_event_split(const std::vector<std::size_t>& event_of, double fraction,
                       std::uint64_t seed);

enum class SplitMode { MicroEvent, Event };

/// Euclidean k-nearest-neighbour vote. Ties on the vote count break toward
/// the class with the smaller summed distance among the k, then class order.
std::vector<ActionClass> knn_classify(const Mat& train_emb,
                                      const std::vector<ActionClass>& train_labels,
                                      const Mat& test_emb, std::size_t k = 5);

struct SvmConfig {
  std::size_t epochs = 60;
  double lr = 0.05;
  double reg = 1e-3;
  std::uint64_t seed = 1;
};

/// One-vs-rest linear SVM without intercept, trained by stochastic
/// subgradient descent on the L2-regularized hinge loss. Argmax score wins;
/// exact ties fall back to class order.
std::vector<ActionClass> svm_classify(const Mat& train_emb,
                                      const std::vector<ActionClass>& train_labels,
                                      const Mat& test_emb, const SvmConfig& cfg);

struct ConfusionMatrix {
  // counts[true][pred], class order Shot, Foul, LostBall
  std::array<std::array<std::size_t, kNumClasses>, kNumClasses> counts{};

  std::size_t total() const;
  std::size_t trace() const;
  double accuracy() const;  // trace / total
};

ConfusionMatrix confusion(const std::vector<ActionClass>& preds,
                          const std::vector<ActionClass>& truth);

enum class ExperimentSetup { EncoderFixed, EncoderEqualsClassifier };

struct ClassifierConfig {
  std::string kind = "knn";  // "knn" | "svm"
  std::size_t knn_k = 5;
  SvmConfig svm;
};

struct ExperimentCell {
  double fraction = 0.0;
  double accuracy = 0.0;
  ConfusionMatrix matrix;
  std::uint64_t split_seed = 0;
};

struct GridSpec {
  ExperimentSetup setup = ExperimentSetup::EncoderEqualsClassifier;
  std::vector<double> fractions;
  double encoder_fraction = 0.8;  // EncoderFixed only
  std::uint64_t seed = 1;         // base for per-fraction split seeds
  ClassifierConfig classifier;
  SplitMode split_mode = SplitMode::MicroEvent;
};

/// Produces embeddings for all items, with only train_ids available to
/// unsupervised training. cell is the fraction index, or SIZE_MAX for the
/// one-off encoder split of the fixed-encoder setup.
using EmbedFn = std::function<Mat(const std::vector<std::size_t>& train_ids, std::size_t cell)>;

struct GridResult {
  std::vector<ExperimentCell> cells;
};

/// The two experiment setups over a fraction grid. EncoderFixed trains the
/// encoder once on the encoder_fraction split and varies only the classifier
/// fraction; EncoderEqualsClassifier re-derives embeddings per fraction and
/// trains the classifier on the same ids.
GridResult run_experiment_grid(const EmbedFn& embed, const std::vector<ActionClass>& labels,
                               const std::vector<std::size_t>& event_of, const GridSpec& spec);

}  // namespace courtseq
