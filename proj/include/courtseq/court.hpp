#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "courtseq/common.hpp"

namespace courtseq {

struct CourtSpec {
  double length_x = 94.0;  // feet
  double width_y = 50.0;   // feet
  double frame_rate = 25.0;

  void validate() const;  // throws on non-positive fields
  double frame_period() const { return 1.0 / frame_rate; }
};

/// One tracking snapshot: ball plus both five-player lineups, court feet.
/// Coordinates may land out of bounds; the fuzzy kernel clamps belief to zero
/// outside a region's support, so no clipping happens here.
struct Frame {
  double t = 0.0;  // seconds, monotone within a period
  Vec2 ball;
  std::vector<Vec2> home;  // 5 entries when well-formed
  std::vector<Vec2> away;
};

/// Raw play-by-play tag as logged.
enum class ActionTag { Make, Miss, Foul, OutOfBound, Turnover, Steal };

/// Merged outcome class. Make and Miss collapse into Shot; OutOfBound,
/// Turnover and Steal collapse into LostBall.
enum class ActionClass { Shot, Foul, LostBall };

constexpr std::size_t kNumClasses = 3;
constexpr std::size_t kNumTags = 6;

ActionClass class_of(ActionTag tag);
std::string to_string(ActionTag tag);
std::string to_string(ActionClass cls);
std::optional<ActionTag> parse_action_tag(const std::string& text);  // case-insensitive
std::optional<ActionClass> parse_action_class(const std::string& text);

/// Contiguous frame run between two consecutive logged actions, labeled by the
/// terminal one. The raw tag is kept next to the merged class so per-tag
/// censuses stay possible.
struct Event {
  std::vector<Frame> frames;
  double start_t = 0.0;  // opening action time (exclusive bound)
  double end_t = 0.0;    // terminal action time (inclusive bound)
  ActionTag tag = ActionTag::Make;
  ActionClass label = ActionClass::Shot;
};

/// Fixed channel layout for flattened frames:
///   0 ball.x, 1 ball.y, 2 home1.x, 3 home1.y, ..., 11 home5.y,
///   12 away1.x, 13 away1.y, ..., 21 away5.y
/// Even channel index = x axis, odd = y axis.
constexpr std::size_t kRawChannels = 22;

bool channel_is_x_axis(std::size_t channel);
double channel_value(const Frame& f, std::size_t channel);

/// Window of W frames cut from an event, flattened to 22 x W.
struct MicroEvent {
  Series series;  // kRawChannels x W
  ActionTag tag = ActionTag::Make;
  ActionClass label = ActionClass::Shot;
  std::size_t source_event_id = 0;
  std::size_t offset_frames = 0;
};

/// Reports every invariant violation without mutating or throwing.
std::vector<std::string> validate_frame(const Frame& f, const CourtSpec& spec);

/// Mirror all x coordinates (x -> length_x - x). Optional attacking-direction
/// normalization; off by default in the pipeline.
void flip_event_x(Event& e, const CourtSpec& spec);

}  // namespace courtseq
