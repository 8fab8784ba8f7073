#include <doctest.h>

#include <cmath>
#include <limits>

#include "courtseq/court.hpp"

using namespace courtseq;

namespace {

Frame well_formed_frame() {
  Frame f;
  f.t = 1.0;
  f.ball = {47.0, 25.0};
  f.home.assign(5, Vec2{40.0, 20.0});
  f.away.assign(5, Vec2{60.0, 30.0});
  return f;
}

}  // namespace

TEST_CASE("label mapping is total and lands on exactly three classes") {
  CHECK(class_of(ActionTag::Make) == ActionClass::Shot);
  CHECK(class_of(ActionTag::Miss) == ActionClass::Shot);
  CHECK(class_of(ActionTag::Foul) == ActionClass::Foul);
  CHECK(class_of(ActionTag::OutOfBound) == ActionClass::LostBall);
  CHECK(class_of(ActionTag::Turnover) == ActionClass::LostBall);
  CHECK(class_of(ActionTag::Steal) == ActionClass::LostBall);

  bool seen[kNumClasses] = {false, false, false};
  for (std::size_t i = 0; i < kNumTags; ++i) {
    seen[static_cast<std::size_t>(class_of(static_cast<ActionTag>(i)))] = true;
  }
  CHECK(seen[0]);
  CHECK(seen[1]);
  CHECK(seen[2]);
}

TEST_CASE("tag parsing is case-insensitive and closed") {
  CHECK(parse_action_tag("make") == ActionTag::Make);
  CHECK(parse_action_tag("MISS") == ActionTag::Miss);
  CHECK(parse_action_tag("Oob") == ActionTag::OutOfBound);
  CHECK(!parse_action_tag("DUNKK").has_value());
}

TEST_CASE("validate_frame reports violations without throwing") {
  const CourtSpec spec;
  CHECK(validate_frame(well_formed_frame(), spec).empty());

  Frame four_home = well_formed_frame();
  four_home.home.pop_back();
  const auto v1 = validate_frame(four_home, spec);
  REQUIRE(v1.size() == 1);
  CHECK(v1[0] == "home count 4 != 5");

  Frame nan_ball = well_formed_frame();
  nan_ball.ball.x = std::numeric_limits<double>::quiet_NaN();
  const auto v2 = validate_frame(nan_ball, spec);
  REQUIRE(v2.size() == 1);
  CHECK(v2[0].find("non-finite coordinate") == 0);

  // out-of-bounds is permitted, only finiteness matters
  Frame oob = well_formed_frame();
  oob.ball.x = -30.0;
  CHECK(validate_frame(oob, spec).empty());
}

TEST_CASE("channel order is ball, home 1-5, away 1-5, x before y") {
  Frame f = well_formed_frame();
  for (std::size_t j = 0; j < 5; ++j) {
    f.home[j] = Vec2{10.0 + static_cast<double>(j), 20.0 + static_cast<double>(j)};
    f.away[j] = Vec2{50.0 + static_cast<double>(j), 30.0 + static_cast<double>(j)};
  }
  CHECK(channel_value(f, 0) == f.ball.x);
  CHECK(channel_value(f, 1) == f.ball.y);
  CHECK(channel_value(f, 2) == f.home[0].x);
  CHECK(channel_value(f, 3) == f.home[0].y);
  CHECK(channel_value(f, 11) == f.home[4].y);
  CHECK(channel_value(f, 12) == f.away[0].x);
  CHECK(channel_value(f, 21) == f.away[4].y);
  for (std::size_t c = 0; c < kRawChannels; ++c) {
    CHECK(channel_is_x_axis(c) == (c % 2 == 0));
  }
}

TEST_CASE("flip_event_x mirrors x and keeps y") {
  const CourtSpec spec;
  Event e;
  e.frames.push_back(well_formed_frame());
  const double bx = e.frames[0].ball.x;
  const double by = e.frames[0].ball.y;
  flip_event_x(e, spec);
  CHECK(e.frames[0].ball.x == spec.length_x - bx);
  CHECK(e.frames[0].ball.y == by);
}

TEST_CASE("CourtSpec validation") {
  CourtSpec bad;
  bad.frame_rate = 0.0;
  CHECK_THROWS(bad.validate());
}
