#include "courtseq/court.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace courtseq {

void CourtSpec::validate() const {
  if (!(length_x > 0.0)) throw std::invalid_argument("CourtSpec: length_x must be positive");
  if (!(width_y > 0.0)) throw std::invalid_argument("CourtSpec: width_y must be positive");
  if (!(frame_rate > 0.0)) throw std::invalid_argument("CourtSpec: frame_rate must be positive");
}

ActionClass class_of(ActionTag tag) {
  switch (tag) {
    case ActionTag::Make:
    case ActionTag::Miss:
      return ActionClass::Shot;
    case ActionTag::Foul:
      return ActionClass::Foul;
    case ActionTag::OutOfBound:
    case ActionTag::Turnover:
    case ActionTag::Steal:
      return ActionClass::LostBall;
  }
  throw std::logic_error("class_of: unknown tag");
}

std::string to_string(ActionTag tag) {
  switch (tag) {
    case ActionTag::Make: return "MAKE";
    case ActionTag::Miss: return "MISS";
    case ActionTag::Foul: return "FOUL";
    case ActionTag::OutOfBound: return "OOB";
    case ActionTag::Turnover: return "TURNOVER";
    case ActionTag::Steal: return "STEAL";
  }
  return "?";
}

std::string to_string(ActionClass cls) {
  switch (cls) {
    case ActionClass::Shot: return "Shot";
    case ActionClass::Foul: return "Foul";
    case ActionClass::LostBall: return "LostBall";
  }
  return "?";
}

namespace {
std::string upper(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}
}  // namespace

std::optional<ActionTag> parse_action_tag(const std::string& text) {
  const std::string u = upper(text);
  if (u == "MAKE") return ActionTag::Make;
  if (u == "MISS") return ActionTag::Miss;
  if (u == "FOUL") return ActionTag::Foul;
  if (u == "OOB") return ActionTag::OutOfBound;
  if (u == "TURNOVER") return ActionTag::Turnover;
  if (u == "STEAL") return ActionTag::Steal;
  return std::nullopt;
}

std::optional<ActionClass> parse_action_class(const std::string& text) {
  const std::string u = upper(text);
  if (u == "SHOT") return ActionClass::Shot;
  if (u == "FOUL") return ActionClass::Foul;
  if (u == "LOSTBALL") return ActionClass::LostBall;
  return std::nullopt;
}

bool channel_is_x_axis(std::size_t channel) { return channel % 2 == 0; }

double channel_value(const Frame& f, std::size_t channel) {
  if (channel >= kRawChannels) throw std::out_of_range("channel_value: channel out of range");
  if (channel == 0) return f.ball.x;
  if (channel == 1) return f.ball.y;
  const std::size_t slot = (channel - 2) / 2;
  const bool is_x = channel_is_x_axis(channel);
  const Vec2& p = slot < 5 ? f.home[slot] : f.away[slot - 5];
  return is_x ? p.x : p.y;
}

std::vector<std::string> validate_frame(const Frame& f, const CourtSpec&) {
  std::vector<std::string> violations;
  if (f.home.size() != 5) {
    violations.push_back("home count " + std::to_string(f.home.size()) + " != 5");
  }
  if (f.away.size() != 5) {
    violations.push_back("away count " + std::to_string(f.away.size()) + " != 5");
  }
  auto check_finite = [&](const Vec2& p, const std::string& who) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      violations.push_back("non-finite coordinate (" + who + ")");
    }
  };
  if (!std::isfinite(f.t)) violations.push_back("non-finite time");
  check_finite(f.ball, "ball");
  for (std::size_t i = 0; i < f.home.size(); ++i) check_finite(f.home[i], "home" + std::to_string(i + 1));
  for (std::size_t i = 0; i < f.away.size(); ++i) check_finite(f.away[i], "away" + std::to_string(i + 1));
  return violations;
}

void flip_event_x(Event& e, const CourtSpec& spec) {
  for (Frame& f : e.frames) {
    f.ball.x = spec.length_x - f.ball.x;
    for (Vec2& p : f.home) p.x = spec.length_x - p.x;
    for (Vec2& p : f.away) p.x = spec.length_x - p.x;
  }
}

Series subseries(const Series& s, std::size_t start, std::size_t len) {
  if (start + len > s.samples) throw std::out_of_range("subseries: range exceeds samples");
  Series out(s.channels, len);
  for (std::size_t c = 0; c < s.channels; ++c) {
    const double* src = s.row(c) + start;
    std::copy(src, src + len, out.row(c));
  }
  return out;
}

}  // namespace courtseq
