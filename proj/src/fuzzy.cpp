#include "courtseq/fuzzy.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "courtseq/kernels.hpp"

namespace courtseq {

void TriParams::validate() const {
  const double lo = std::min(a, c);
  const double hi = std::max(a, c);
  if (!(b > lo && b < hi)) {
    throw std::invalid_argument("TriParams: b must lie strictly between a and c");
  }
}

void KernelBank::validate() const {
  for (const TriParams& p : x_params) p.validate();
  for (const TriParams& p : y_params) p.validate();
}

KernelBank load_kernel_bank(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("kernel bank file not found: " + path);
  KernelBank bank;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (lineno == 1 && line.rfind("axis,", 0) == 0) continue;  // header
    std::istringstream ss(line);
    std::string axis, region, a, b, c;
    if (!std::getline(ss, axis, ',') || !std::getline(ss, region, ',') ||
        !std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c, ',')) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected axis,region,a,b,c");
    }
    const std::size_t r = std::stoul(region);
    if (r >= kRegionsPerAxis) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": region out of range");
    }
    const TriParams p{std::stod(a), std::stod(b), std::stod(c)};
    if (axis == "x") {
      bank.x_params[r] = p;
    } else if (axis == "y") {
      bank.y_params[r] = p;
    } else {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": axis must be x or y");
    }
  }
  bank.validate();
  return bank;
}

double tri_membership(double x, const TriParams& p) {
  const double rise = (x - p.a) / (p.b - p.a);
  const double fall = (p.c - x) / (p.c - p.b);
  const double m = rise < fall ? rise : fall;
  return m > 0.0 ? m : 0.0;
}

FuzzySeries fuzzify(const MicroEvent& me, const KernelBank& bank, std::size_t micro_event_id) {
  if (me.series.channels != kRawChannels) {
    throw std::invalid_argument("fuzzify: expected " + std::to_string(kRawChannels) +
                                " channels, got " + std::to_string(me.series.channels));
  }
  const auto& K = kern::ops();
  const std::size_t w = me.series.samples;
  FuzzySeries out;
  out.values = Series(kFuzzyChannels, w);
  out.label = me.label;
  out.tag = me.tag;
  out.micro_event_id = micro_event_id;
  for (std::size_t c = 0; c < kRawChannels; ++c) {
    const auto& params = channel_is_x_axis(c) ? bank.x_params : bank.y_params;
    for (std::size_t r = 0; r < kRegionsPerAxis; ++r) {
      const TriParams& p = params[r];
      K.tri_membership(w, p.a, p.b, p.c, me.series.row(c),
                       out.values.row(c * kRegionsPerAxis + r));
    }
  }
  return out;
}

}  // namespace courtseq
