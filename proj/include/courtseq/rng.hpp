#pragma once

#include <cstdint>
#include <random>

namespace courtseq {

std::uint64_t splitmix64(std::uint64_t x);

/// Deterministic RNG. std::mt19937_64 itself is pinned by the standard; all
/// value derivations (uniform doubles, bounded ints, normals) are done by hand
/// here because the std distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform in [0, n), rejection-sampled so every value is equally likely.
  std::uint64_t below(std::uint64_t n);

  /// Uniform integer in [lo, hi], inclusive.
  std::int64_t range_inclusive(std::int64_t lo, std::int64_t hi);

  /// Standard normal via Box-Muller (second value cached).
  double normal();
  double normal(double mean, double sigma) { return mean + sigma * normal(); }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Seed consumers, used to derive independent per-stage streams from the one
/// global seed. Adding a stage must not perturb the streams of existing ones,
/// so each gets its own (subsystem, index) slot.
enum class Subsystem : std::uint64_t {
  Synth = 1,
  EncoderInit = 2,
  TripletSample = 3,
  ClassifierSplit = 4,
  EncoderSplit = 5,
  Svm = 6,
};

std::uint64_t derive_seed(std::uint64_t global_seed, Subsystem s, std::uint64_t index = 0);

}  // namespace courtseq
