#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace courtseq {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Dense channels x samples block, row-major (one contiguous row per channel).
struct Series {
  std::size_t channels = 0;
  std::size_t samples = 0;
  std::vector<double> data;

  Series() = default;
  Series(std::size_t c, std::size_t s) : channels(c), samples(s), data(c * s, 0.0) {}

  double* row(std::size_t c) { return data.data() + c * samples; }
  const double* row(std::size_t c) const { return data.data() + c * samples; }
  double& at(std::size_t c, std::size_t t) { return data[c * samples + t]; }
  double at(std::size_t c, std::size_t t) const { return data[c * samples + t]; }
};

/// Contiguous time slice [start, start+len) of all channels.
Series subseries(const Series& s, std::size_t start, std::size_t len);

struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  bool empty() const { return data.empty(); }
  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

}  // namespace courtseq
