#include "courtseq/segmentation.hpp"

#include <cmath>
#include <stdexcept>

namespace courtseq {

void WindowConfig::validate() const {
  if (!(stride_seconds > 0.0 && stride_seconds <= window_seconds &&
        window_seconds <= min_event_seconds)) {
    throw std::invalid_argument(
        "WindowConfig: need 0 < stride_seconds <= window_seconds <= min_event_seconds");
  }
}

namespace {
std::size_t to_frames(double seconds, const CourtSpec& spec) {
  const long n = std::lround(seconds * spec.frame_rate);
  if (n < 1) throw std::invalid_argument("WindowConfig: duration under one frame");
  return static_cast<std::size_t>(n);
}
}  // namespace

std::size_t WindowConfig::window_frames(const CourtSpec& spec) const {
  return to_frames(window_seconds, spec);
}
std::size_t WindowConfig::stride_frames(const CourtSpec& spec) const {
  return to_frames(stride_seconds, spec);
}
std::size_t WindowConfig::min_event_frames(const CourtSpec& spec) const {
  return to_frames(min_event_seconds, spec);
}

std::vector<Event> filter_events(const std::vector<Event>& events, const WindowConfig& cfg,
                                 const CourtSpec& spec) {
  cfg.validate();
  const std::size_t min_frames = cfg.min_event_frames(spec);
  std::vector<Event> kept;
  for (const Event& e : events) {
    if (e.frames.size() >= min_frames) kept.push_back(e);
  }
  return kept;
}

std::vector<MicroEvent> slide_windows(const Event& event, std::size_t event_id,
                                      const WindowConfig& cfg, const CourtSpec& spec) {
  cfg.validate();
  const std::size_t w = cfg.window_frames(spec);
  const std::size_t s = cfg.stride_frames(spec);
  const std::size_t len = event.frames.size();
  if (len < w) {
    throw std::invalid_argument("slide_windows: event shorter than the window; filter first");
  }
  const std::size_t count = (len - w) / s + 1;
  std::vector<MicroEvent> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t offset = i * s;
    MicroEvent me;
    me.series = Series(kRawChannels, w);
    for (std::size_t k = 0; k < w; ++k) {
      const Frame& f = event.frames[offset + k];
      for (std::size_t c = 0; c < kRawChannels; ++c) {
        me.series.at(c, k) = channel_value(f, c);
      }
    }
    me.tag = event.tag;
    me.label = event.label;
    me.source_event_id = event_id;
    me.offset_frames = offset;
    out.push_back(std::move(me));
  }
  return out;
}

std::vector<MicroEvent> slide_all(const std::vector<Event>& events, const WindowConfig& cfg,
                                  const CourtSpec& spec) {
  std::vector<MicroEvent> out;
  for (std::size_t id = 0; id < events.size(); ++id) {
    auto windows = slide_windows(events[id], id, cfg, spec);
    for (auto& me : windows) out.push_back(std::move(me));
  }
  return out;
}

Census census(const std::vector<MicroEvent>& micro_events) {
  Census c;
  for (const MicroEvent& me : micro_events) {
    c.per_class[static_cast<std::size_t>(me.label)] += 1;
    c.per_tag[static_cast<std::size_t>(me.tag)] += 1;
    c.total += 1;
  }
  return c;
}

}  // namespace courtseq
