#include "courtseq/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace courtseq {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
  // threshold = 2^64 mod n; rejecting draws under it leaves a whole number of
  // residue cycles, so the modulo below is bias-free.
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = gen_();
    if (r >= threshold) return r % n;
  }
}

std::int64_t Rng::range_inclusive(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw std::invalid_argument("Rng::range_inclusive: empty range");
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(below(span));
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double u2 = uniform01();
  const double mag = std::sqrt(-2.0 * std::log(u1));
  const double two_pi = 6.283185307179586476925286766559;
  spare_ = mag * std::sin(two_pi * u2);
  have_spare_ = true;
  return mag * std::cos(two_pi * u2);
}

std::uint64_t derive_seed(std::uint64_t global_seed, Subsystem s, std::uint64_t index) {
  const std::uint64_t tag = splitmix64(static_cast<std::uint64_t>(s) * 0x9E3779B97F4A7C15ULL);
  return splitmix64(splitmix64(global_seed ^ tag) + index);
}

}  // namespace courtseq
