#include "courtseq/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "courtseq/kernels.hpp"
#include "courtseq/rng.hpp"

namespace courtseq {

namespace {

std::vector<std::size_t> shuffled_ids(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> ids(n);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(ids[i - 1], ids[rng.below(i)]);
  return ids;
}

Split split_from_shuffle(std::vector<std::size_t> ids, std::size_t n_train, double fraction,
                         std::uint64_t seed) {
  Split s;
  s.fraction = fraction;
  s.seed = seed;
  s.train_ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train), ids.end());
  std::sort(s.train_ids.begin(), s.train_ids.end());
  std::sort(s.test_ids.begin(), s.test_ids.end());
  return s;
}

}  // namespace

Split make_split(std::size_t n, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("make_split: fraction must be in (0, 1)");
  }
  const std::size_t n_train =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train >= n) {
    throw std::invalid_argument("make_split: fraction yields an empty train or test side");
  }
  return split_from_shuffle(shuffled_ids(n, seed), n_train, fraction, seed);
}

Split make_event_split(const std::vector<std::size_t>& event_of, double fraction,
                       std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("make_event_split: fraction must be in (0, 1)");
  }
  std::vector<std::size_t> events(event_of.begin(), event_of.end());
  std::sort(events.begin(), events.end());
  events.erase(std::unique(events.begin(), events.end()), events.end());
  const std::size_t n_events = events.size();
  const std::size_t n_train =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n_events)));
  if (n_train == 0 || n_train >= n_events) {
    throw std::invalid_argument("make_event_split: fraction yields an empty train or test side");
  }
  std::vector<std::size_t> order(n_events);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n_events; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  std::set<std::size_t> train_events;
  for (std::size_t i = 0; i < n_train; ++i) train_events.insert(events[order[i]]);

  Split s;
  s.fraction = fraction;
  s.seed = seed;
  for (std::size_t i = 0; i < event_of.size(); ++i) {
    (train_events.count(event_of[i]) ? s.train_ids : s.test_ids).push_back(i);
  }
  if (s.train_ids.empty() || s.test_ids.empty()) {
    throw std::invalid_argument("make_event_split: empty side after event expansion");
  }
  return s;
}

std::vector<ActionClass> knn_classify(const Mat& train_emb,
                                      const std::vector<ActionClass>& train_labels,
                                      const Mat& test_emb, std::size_t k) {
  if (train_emb.rows != train_labels.size()) {
    throw std::invalid_argument("knn_classify: label count mismatch");
  }
  if (train_emb.cols != test_emb.cols) {
    throw std::invalid_argument("knn_classify: embedding dimension mismatch");
  }
  if (k < 1 || k > train_emb.rows) {
    throw std::invalid_argument("knn_classify: need 1 <= k <= |train|");
  }
  const auto& K = kern::ops();
  std::vector<ActionClass> preds;
  preds.reserve(test_emb.rows);
  std::vector<std::pair<double, std::size_t>> dist(train_emb.rows);
  for (std::size_t q = 0; q < test_emb.rows; ++q) {
    for (std::size_t i = 0; i < train_emb.rows; ++i) {
      dist[i] = {K.sq_l2(test_emb.row(q), train_emb.row(i), test_emb.cols), i};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    std::array<std::size_t, kNumClasses> votes{};
    std::array<double, kNumClasses> summed{};
    for (std::size_t j = 0; j < k; ++j) {
      const auto cls = static_cast<std::size_t>(train_labels[dist[j].second]);
      votes[cls] += 1;
      summed[cls] += std::sqrt(dist[j].first);
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < kNumClasses; ++c) {
      if (votes[c] > votes[best] || (votes[c] == votes[best] && summed[c] < summed[best])) {
        best = c;
      }
    }
    preds.push_back(static_cast<ActionClass>(best));
  }
  return preds;
}

std::vector<ActionClass> svm_classify(const Mat& train_emb,
                                      const std::vector<ActionClass>& train_labels,
                                      const Mat& test_emb, const SvmConfig& cfg) {
  if (train_emb.rows != train_labels.size()) {
    throw std::invalid_argument("svm_classify: label count mismatch");
  }
  if (train_emb.cols != test_emb.cols) {
    throw std::invalid_argument("svm_classify: embedding dimension mismatch");
  }
  std::set<ActionClass> present(train_labels.begin(), train_labels.end());
  if (present.size() < 2) {
    throw std::invalid_argument("svm_classify: training set has a single class");
  }
  const auto& K = kern::ops();
  const std::size_t d = train_emb.cols;
  Mat w(kNumClasses, d);

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(train_emb.rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    for (const std::size_t idx : order) {
      const double* x = train_emb.row(idx);
      for (std::size_t c = 0; c < kNumClasses; ++c) {
        const double y = train_labels[idx] == static_cast<ActionClass>(c) ? 1.0 : -1.0;
        const double margin = y * K.dot(w.row(c), x, d);
        if (margin < 1.0) K.axpy(d, cfg.lr * y, x, w.row(c));
        // shrink the post-update iterate; an overwhelming reg zeroes w exactly
        K.scale(d, std::max(0.0, 1.0 - cfg.lr * cfg.reg), w.row(c));
      }
    }
  }

  std::vector<ActionClass> preds;
  preds.reserve(test_emb.rows);
  for (std::size_t q = 0; q < test_emb.rows; ++q) {
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      const double score = K.dot(w.row(c), test_emb.row(q), test_emb.cols);
      if (score > best_score) {
        best_score = score;
        best = c;
      }
    }
    preds.push_back(static_cast<ActionClass>(best));
  }
  return preds;
}

std::size_t ConfusionMatrix::total() const {
  std::size_t n = 0;
  for (const auto& row : counts) {
    for (const std::size_t c : row) n += c;
  }
  return n;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t n = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) n += counts[c][c];
  return n;
}

double ConfusionMatrix::accuracy() const {
  const std::size_t n = total();
  if (n == 0) throw std::domain_error("ConfusionMatrix: accuracy of an empty matrix");
  return static_cast<double>(trace()) / static_cast<double>(n);
}

ConfusionMatrix confusion(const std::vector<ActionClass>& preds,
                          const std::vector<ActionClass>& truth) {
  if (preds.size() != truth.size()) {
    throw std::invalid_argument("confusion: prediction/truth length mismatch");
  }
  ConfusionMatrix m;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    m.counts[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(preds[i])] += 1;
  }
  return m;
}

namespace {

ExperimentCell evaluate_cell(const Mat& embeddings, const std::vector<ActionClass>& labels,
                             const Split& split, const ClassifierConfig& classifier) {
  Mat train_emb(split.train_ids.size(), embeddings.cols);
  Mat test_emb(split.test_ids.size(), embeddings.cols);
  std::vector<ActionClass> train_labels, test_labels;
  train_labels.reserve(split.train_ids.size());
  test_labels.reserve(split.test_ids.size());
  for (std::size_t i = 0; i < split.train_ids.size(); ++i) {
    std::copy_n(embeddings.row(split.train_ids[i]), embeddings.cols, train_emb.row(i));
    train_labels.push_back(labels[split.train_ids[i]]);
  }
  for (std::size_t i = 0; i < split.test_ids.size(); ++i) {
    std::copy_n(embeddings.row(split.test_ids[i]), embeddings.cols, test_emb.row(i));
    test_labels.push_back(labels[split.test_ids[i]]);
  }
  std::vector<ActionClass> preds;
  if (classifier.kind == "svm") {
    preds = svm_classify(train_emb, train_labels, test_emb, classifier.svm);
  } else if (classifier.kind == "knn") {
    const std::size_t k = std::min(classifier.knn_k, train_emb.rows);
    preds = knn_classify(train_emb, train_labels, test_emb, k);
  } else {
    throw std::invalid_argument("unknown classifier kind: " + classifier.kind);
  }
  ExperimentCell cell;
  cell.fraction = split.fraction;
  cell.split_seed = split.seed;
  cell.matrix = confusion(preds, test_labels);
  cell.accuracy = cell.matrix.accuracy();
  return cell;
}

Split split_for(const std::vector<std::size_t>& event_of, std::size_t n, double fraction,
                std::uint64_t seed, SplitMode mode) {
  return mode == SplitMode::Event ? make_event_split(event_of, fraction, seed)
                                  : make_split(n, fraction, seed);
}

}  // namespace

GridResult run_experiment_grid(const EmbedFn& embed, const std::vector<ActionClass>& labels,
                               const std::vector<std::size_t>& event_of, const GridSpec& spec) {
  if (labels.empty()) throw std::invalid_argument("run_experiment_grid: no labels");
  if (event_of.size() != labels.size()) {
    throw std::invalid_argument("run_experiment_grid: event_of/labels length mismatch");
  }
  const std::size_t n = labels.size();
  GridResult result;

  if (spec.setup == ExperimentSetup::EncoderFixed) {
    const std::uint64_t enc_seed = derive_seed(spec.seed, Subsystem::EncoderSplit);
    const Split enc_split =
        split_for(event_of, n, spec.encoder_fraction, enc_seed, spec.split_mode);
    const Mat embeddings = embed(enc_split.train_ids, static_cast<std::size_t>(-1));
    if (embeddings.rows != n) {
      throw std::invalid_argument("run_experiment_grid: embedder returned wrong row count");
    }
    for (std::size_t j = 0; j < spec.fractions.size(); ++j) {
      const std::uint64_t seed = derive_seed(spec.seed, Subsystem::ClassifierSplit, j);
      const Split split = split_for(event_of, n, spec.fractions[j], seed, spec.split_mode);
      result.cells.push_back(evaluate_cell(embeddings, labels, split, spec.classifier));
    }
  } else {
    for (std::size_t j = 0; j < spec.fractions.size(); ++j) {
      const std::uint64_t seed = derive_seed(spec.seed, Subsystem::ClassifierSplit, j);
      const Split split = split_for(event_of, n, spec.fractions[j], seed, spec.split_mode);
      const Mat embeddings = embed(split.train_ids, j);
      if (embeddings.rows != n) {
        throw std::invalid_argument("run_experiment_grid: embedder returned wrong row count");
      }
      result.cells.push_back(evaluate_cell(embeddings, labels, split, spec.classifier));
    }
  }
  return result;
}

}  // namespace courtseq
