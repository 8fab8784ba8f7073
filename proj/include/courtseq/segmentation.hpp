#pragma once

#include <array>
#include <map>
#include <vector>

#include "courtseq/court.hpp"

namespace courtseq {

struct WindowConfig {
  double window_seconds = 1.0;
  double stride_seconds = 0.2;
  double min_event_seconds = 1.0;

  void validate() const;  // 0 < stride <= window <= min_event
  std::size_t window_frames(const CourtSpec& spec) const;
  std::size_t stride_frames(const CourtSpec& spec) const;
  std::size_t min_event_frames(const CourtSpec& spec) const;
};

/// Keeps events whose frame count reaches the minimum duration; an event of
/// exactly one window length is retained. Order preserved.
std::vector<Event> filter_events(const std::vector<Event>& events, const WindowConfig& cfg,
                                 const CourtSpec& spec);

/// Slides a W-frame window at stride S over an event that passed the duration
/// filter; yields floor((len-W)/S)+1 micro-events at offsets 0, S, 2S, ...
/// Each inherits the event's label and records its offset.
std::vector<MicroEvent> slide_windows(const Event& event, std::size_t event_id,
                                      const WindowConfig& cfg, const CourtSpec& spec);

/// All events at once; output ordered by (event id, offset).
std::vector<MicroEvent> slide_all(const std::vector<Event>& events, const WindowConfig& cfg,
                                  const CourtSpec& spec);

struct Census {
  std::array<std::size_t, kNumClasses> per_class{};  // indexed by ActionClass
  std::array<std::size_t, kNumTags> per_tag{};       // indexed by ActionTag
  std::size_t total = 0;
};

Census census(const std::vector<MicroEvent>& micro_events);

}  // namespace courtseq
