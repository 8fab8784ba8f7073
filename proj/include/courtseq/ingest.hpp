#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "courtseq/court.hpp"
#include "courtseq/rng.hpp"

namespace courtseq {

struct PbpAction {
  double t = 0.0;  // seconds
  int period = 1;
  ActionTag tag = ActionTag::Make;
};

struct TrackingData {
  // Contiguous 25 Hz runs. Gaps of up to 3 missing frames are repaired by
  // linear interpolation; anything longer starts a new segment.
  std::vector<std::vector<Frame>> segments;
  std::vector<std::string> warnings;
};

struct PbpData {
  std::vector<PbpAction> actions;  // sorted by (period, t)
  std::vector<std::string> warnings;
};

struct AlignResult {
  std::vector<Event> events;
  std::vector<std::string> warnings;
};

/// Line-delimited tracking records, one JSON object per frame:
///   {"t": 12.34, "ball": [x,y], "home": [[x,y]x5], "away": [[x,y]x5]}
/// Malformed lines, entity-count violations, non-finite coordinates and
/// non-monotone times throw with the offending line number.
TrackingData parse_tracking(std::istream& in, const CourtSpec& spec);
TrackingData parse_tracking_file(const std::string& path, const CourtSpec& spec);

/// CSV "t,period,action"; action is one of MAKE, MISS, FOUL, OOB, TURNOVER,
/// STEAL (case-insensitive). Unsorted rows are sorted with a warning.
PbpData parse_pbp(std::istream& in);
PbpData parse_pbp_file(const std::string& path);

/// One event per consecutive action pair (a_i, a_{i+1}), holding the frames
/// with a_i.t < t <= a_{i+1}.t and labeled by a_{i+1}. When a tracking gap
/// falls inside the interval, the contiguous run adjacent to the terminal
/// action is kept. Events with no frames are dropped with a warning.
AlignResult align(const TrackingData& tracking, const std::vector<PbpAction>& actions,
                  const CourtSpec& spec);

// ---------------------------------------------------------------------------
// Synthetic data (stand-in for a live tracking feed)

struct SynthConfig {
  std::size_t n_events_per_class = 10;
  double duration_min = 2.0;  // seconds
  double duration_max = 4.0;
  double noise_sigma = 0.5;  // feet
  std::uint64_t seed = 1;
  CourtSpec spec;

  void validate() const;
};

/// Two-segment linear motion: pos(tau) = start + d1*min(tau,knee)/knee
///                                             + d2*max(tau-knee,0)/(1-knee).
struct LinearMove {
  Vec2 start;
  Vec2 d1;  // displacement over [0, knee]
  Vec2 d2;  // displacement over (knee, 1]
  double knee = 1.0;
};

Vec2 eval_linear_move(const LinearMove& m, double tau);

/// Ball curve for shot events: eased convergence on the basket with a small
/// lateral wobble:
///   pos(tau) = start + (target-start)*tau^ease_p + (0, amp*sin(2*pi*freq*tau))
struct ShotBallCurve {
  Vec2 start;
  Vec2 target;
  double ease_p = 1.5;
  double wobble_amp = 0.0;
  double wobble_freq = 1.0;
};

Vec2 eval_shot_ball(const ShotBallCurve& curve, double tau);

/// Per-event motion family. Each class has a distinct signature:
///   Shot      — ball accelerates into the high-x basket, players collapse
///               toward it;
///   Foul      — everyone advances slowly, then freezes at the contact
///               fraction;
///   LostBall  — ball advances to an apex and reverses hard toward low x
///               while defenders burst after it.
struct SynthEventParams {
  ActionClass cls = ActionClass::Shot;
  ActionTag tag = ActionTag::Make;
  std::size_t n_frames = 0;
  ShotBallCurve shot_ball;  // used when cls == Shot
  LinearMove ball_move;     // used otherwise
  std::array<LinearMove, 5> home;
  std::array<LinearMove, 5> away;
};

SynthEventParams draw_event_params(ActionTag tag, Rng& rng, const SynthConfig& cfg);

/// Noise-free positions at frame k (0-based); tau = (k+1)/n_frames.
Frame synth_exact_frame(const SynthEventParams& p, std::size_t k, double t);

struct SynthData {
  std::vector<Frame> frames;
  std::vector<PbpAction> actions;  // n_events + 1 entries; [0] opens the stream
};

/// Deterministic per (cfg, seed): same config twice gives identical output.
SynthData generate_synthetic(const SynthConfig& cfg);

/// Hand oracle on the ball channel of a noise-free event; classifies by net x
/// displacement and tail-speed collapse. Used to sanity-check the families.
ActionClass rule_classify_event(const Event& e);

void write_tracking_file(const std::string& path, const std::vector<Frame>& frames);
void write_pbp_file(const std::string& path, const std::vector<PbpAction>& actions);

}  // namespace courtseq
