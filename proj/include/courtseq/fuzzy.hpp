#pragma once

#include <array>
#include <string>

#include "courtseq/court.hpp"

namespace courtseq {

/// Triangle with belief 1 at b and 0 at (and beyond) a and c. The endpoints
/// are allowed in either order; the evaluation formula peaks at b regardless,
/// so descending parameter rows are used as given, never re-sorted.
struct TriParams {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  void validate() const;  // b strictly between min(a,c) and max(a,c)
};

constexpr std::size_t kRegionsPerAxis = 5;

/// Five court regions per axis. Defaults carry the stock parameters for a
/// 94 x 50 court: x regions A..E peak at 94, 72, 47, 22, 0 and y regions M..Q
/// peak at 0, 17, 33, 50, 51.
struct KernelBank {
  std::array<TriParams, kRegionsPerAxis> x_params{
      TriParams{98.0, 94.0, 72.0}, TriParams{94.0, 72.0, 47.0}, TriParams{72.0, 47.0, 22.0},
      TriParams{47.0, 22.0, 0.0}, TriParams{22.0, 0.0, -4.0}};
  std::array<TriParams, kRegionsPerAxis> y_params{
      TriParams{-2.0, 0.0, 17.0}, TriParams{0.0, 17.0, 33.0}, TriParams{17.0, 33.0, 50.0},
      TriParams{33.0, 50.0, 51.0}, TriParams{50.0, 51.0, 60.0}};

  void validate() const;
};

/// Load an override bank from CSV rows "axis,region,a,b,c" with axis x|y and
/// region 0..4. Regions not listed keep their defaults.
KernelBank load_kernel_bank(const std::string& path);

/// max(min((x - a) / (b - a), (c - x) / (c - b)), 0)
double tri_membership(double x, const TriParams& p);

constexpr std::size_t kFuzzyChannels = kRawChannels * kRegionsPerAxis;  // 110

/// Presence-potential expansion of one micro-event: each raw channel becomes
/// five belief channels, x channels through x_params and y channels through
/// y_params. Output channel c*5+r is region r of input channel c.
struct FuzzySeries {
  Series values;  // kFuzzyChannels x W, all entries in [0,1]
  ActionClass label = ActionClass::Shot;
  ActionTag tag = ActionTag::Make;
  std::size_t micro_event_id = 0;
};

FuzzySeries fuzzify(const MicroEvent& me, const KernelBank& bank, std::size_t micro_event_id);

}  // namespace courtseq
