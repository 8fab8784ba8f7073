#include "courtseq/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace courtseq {

namespace {

[[noreturn]] void line_error(std::size_t lineno, const std::string& what) {
  throw std::runtime_error("line " + std::to_string(lineno) + ": " + what);
}

Vec2 read_xy(const nlohmann::json& j, std::size_t lineno, const char* who) {
  if (!j.is_array() || j.size() != 2) {
    line_error(lineno, std::string(who) + " must be a [x,y] pair");
  }
  return Vec2{j[0].get<double>(), j[1].get<double>()};
}

Frame interpolate(const Frame& a, const Frame& b, double w) {
  Frame f;
  f.t = a.t + (b.t - a.t) * w;
  auto lerp = [w](const Vec2& p, const Vec2& q) {
    return Vec2{p.x + (q.x - p.x) * w, p.y + (q.y - p.y) * w};
  };
  f.ball = lerp(a.ball, b.ball);
  f.home.resize(5);
  f.away.resize(5);
  for (std::size_t i = 0; i < 5; ++i) {
    f.home[i] = lerp(a.home[i], b.home[i]);
    f.away[i] = lerp(a.away[i], b.away[i]);
  }
  return f;
}

}  // namespace

TrackingData parse_tracking(std::istream& in, const CourtSpec& spec) {
  spec.validate();
  TrackingData out;
  out.segments.emplace_back();
  std::string line;
  std::size_t lineno = 0;
  const double period = spec.frame_period();
  bool have_prev = false;
  Frame prev;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      line_error(lineno, std::string("malformed record: ") + e.what());
    }
    if (!j.is_object() || !j.contains("t") || !j.contains("ball") || !j.contains("home") ||
        !j.contains("away")) {
      line_error(lineno, "record must contain t, ball, home, away");
    }
    Frame f;
    f.t = j["t"].get<double>();
    f.ball = read_xy(j["ball"], lineno, "ball");
    const auto& home = j["home"];
    const auto& away = j["away"];
    if (!home.is_array() || !away.is_array()) line_error(lineno, "home/away must be arrays");
    for (const auto& p : home) f.home.push_back(read_xy(p, lineno, "home entry"));
    for (const auto& p : away) f.away.push_back(read_xy(p, lineno, "away entry"));
    const auto violations = validate_frame(f, spec);
    if (!violations.empty()) line_error(lineno, violations.front());

    if (have_prev) {
      const double dt = f.t - prev.t;
      if (dt <= 0.0) line_error(lineno, "non-monotone time within a segment");
      const long steps = std::lround(dt / period);
      if (steps <= 0) line_error(lineno, "frames closer than half a frame period");
      if (steps > 4) {
        // gap of steps-1 > 3 missing frames: refuse to interpolate, new segment
        out.segments.emplace_back();
      } else if (steps > 1) {
        for (long s = 1; s < steps; ++s) {
          out.segments.back().push_back(
              interpolate(prev, f, static_cast<double>(s) / static_cast<double>(steps)));
        }
      }
    }
    out.segments.back().push_back(std::move(f));
    prev = out.segments.back().back();
    have_prev = true;
  }
  // drop a trailing empty segment from an empty stream
  while (!out.segments.empty() && out.segments.back().empty()) out.segments.pop_back();
  return out;
}

TrackingData parse_tracking_file(const std::string& path, const CourtSpec& spec) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("tracking file not found: " + path);
  try {
    return parse_tracking(in, spec);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

PbpData parse_pbp(std::istream& in) {
  PbpData out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1 && line.rfind("t,", 0) == 0) continue;  // header
    std::istringstream ss(line);
    std::string t_str, period_str, action_str;
    if (!std::getline(ss, t_str, ',') || !std::getline(ss, period_str, ',') ||
        !std::getline(ss, action_str)) {
      line_error(lineno, "expected t,period,action");
    }
    PbpAction a;
    try {
      a.t = std::stod(t_str);
      a.period = std::stoi(period_str);
    } catch (const std::exception&) {
      line_error(lineno, "bad numeric field");
    }
    // trim trailing whitespace/CR
    while (!action_str.empty() && (action_str.back() == '\r' || action_str.back() == ' ')) {
      action_str.pop_back();
    }
    const auto tag = parse_action_tag(action_str);
    if (!tag) line_error(lineno, "unknown action tag: " + action_str);
    a.tag = *tag;
    out.actions.push_back(a);
  }
  auto by_period_time = [](const PbpAction& a, const PbpAction& b) {
    return a.period != b.period ? a.period < b.period : a.t < b.t;
  };
  if (!std::is_sorted(out.actions.begin(), out.actions.end(), by_period_time)) {
    std::stable_sort(out.actions.begin(), out.actions.end(), by_period_time);
    out.warnings.push_back("play-by-play rows were out of order; sorted by (period, t)");
  }
  return out;
}

PbpData parse_pbp_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("play-by-play file not found: " + path);
  try {
    return parse_pbp(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

AlignResult align(const TrackingData& tracking, const std::vector<PbpAction>& actions,
                  const CourtSpec& spec) {
  AlignResult out;
  if (actions.size() < 2) return out;  // needs a terminating action

  double min_frame_t = 0.0, max_frame_t = 0.0;
  bool any_frame = false;
  for (const auto& seg : tracking.segments) {
    if (seg.empty()) continue;
    if (!any_frame) {
      min_frame_t = seg.front().t;
      max_frame_t = seg.back().t;
      any_frame = true;
    } else {
      min_frame_t = std::min(min_frame_t, seg.front().t);
      max_frame_t = std::max(max_frame_t, seg.back().t);
    }
  }
  if (!any_frame || max_frame_t <= actions.front().t || min_frame_t > actions.back().t) {
    throw std::runtime_error("align: frame and action time ranges do not overlap");
  }

  const double period = spec.frame_period();
  for (std::size_t i = 0; i + 1 < actions.size(); ++i) {
    const double t0 = actions[i].t;
    const double t1 = actions[i + 1].t;
    std::vector<Frame> collected;
    for (const auto& seg : tracking.segments) {
      for (const Frame& f : seg) {
        if (f.t > t0 && f.t <= t1) collected.push_back(f);
      }
    }
    std::stable_sort(collected.begin(), collected.end(),
                     [](const Frame& a, const Frame& b) { return a.t < b.t; });
    // keep the contiguous run adjacent to the terminal action
    std::size_t run_start = 0;
    for (std::size_t k = 1; k < collected.size(); ++k) {
      if (std::lround((collected[k].t - collected[k - 1].t) / period) != 1) run_start = k;
    }
    if (collected.empty()) {
      out.warnings.push_back("event (" + std::to_string(t0) + ", " + std::to_string(t1) +
                             "] has no frames; dropped");
      continue;
    }
    Event e;
    e.frames.assign(collected.begin() + static_cast<std::ptrdiff_t>(run_start), collected.end());
    e.start_t = t0;
    e.end_t = t1;
    e.tag = actions[i + 1].tag;
    e.label = class_of(e.tag);
    out.events.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic generation

void SynthConfig::validate() const {
  spec.validate();
  if (n_events_per_class < 1) {
    throw std::invalid_argument("SynthConfig: n_events_per_class must be >= 1");
  }
  if (!(duration_min > 1.0 && duration_max <= 30.0 && duration_min <= duration_max)) {
    throw std::invalid_argument("SynthConfig: duration range must lie in (1, 30]");
  }
  if (noise_sigma < 0.0) throw std::invalid_argument("SynthConfig: noise_sigma must be >= 0");
}

Vec2 eval_linear_move(const LinearMove& m, double tau) {
  const double first = std::min(tau, m.knee) / m.knee;
  const double second = m.knee < 1.0 ? std::max(tau - m.knee, 0.0) / (1.0 - m.knee) : 0.0;
  return Vec2{m.start.x + m.d1.x * first + m.d2.x * second,
              m.start.y + m.d1.y * first + m.d2.y * second};
}

Vec2 eval_shot_ball(const ShotBallCurve& curve, double tau) {
  const double ease = std::pow(tau, curve.ease_p);
  const double two_pi = 6.283185307179586476925286766559;
  return Vec2{curve.start.x + (curve.target.x - curve.start.x) * ease,
              curve.start.y + (curve.target.y - curve.start.y) * ease +
                  curve.wobble_amp * std::sin(two_pi * curve.wobble_freq * tau)};
}

namespace {
// Lateral slots the five players of a lineup are anchored to.
double y_slot(std::size_t j) { return 10.0 + 7.5 * static_cast<double>(j); }
}  // namespace

SynthEventParams draw_event_params(ActionTag tag, Rng& rng, const SynthConfig& cfg) {
  SynthEventParams p;
  p.tag = tag;
  p.cls = class_of(tag);
  const double duration = rng.uniform(cfg.duration_min, cfg.duration_max);
  p.n_frames = static_cast<std::size_t>(
      std::max<long>(1, std::lround(duration * cfg.spec.frame_rate)));
  const Vec2 ball0{rng.uniform(25.0, 45.0), rng.uniform(15.0, 35.0)};

  double knee = 1.0;  // Foul contact / LostBall apex fraction
  switch (p.cls) {
    case ActionClass::Shot: {
      p.shot_ball.start = ball0;
      p.shot_ball.target = Vec2{88.0 + rng.uniform(0.0, 2.0), 25.0 + rng.uniform(-3.0, 3.0)};
      p.shot_ball.ease_p = rng.uniform(1.2, 1.8);
      p.shot_ball.wobble_amp = rng.uniform(0.0, 3.0);
      p.shot_ball.wobble_freq = rng.uniform(0.5, 1.5);
      break;
    }
    case ActionClass::Foul: {
      knee = rng.uniform(0.5, 0.7);
      const double carry = rng.uniform(6.0, 12.0);
      const double y_drift = rng.uniform(-4.0, 4.0);
      p.ball_move = LinearMove{ball0, Vec2{carry, y_drift}, Vec2{0.0, 0.0}, knee};
      break;
    }
    case ActionClass::LostBall: {
      knee = rng.uniform(0.4, 0.6);
      const double advance = rng.uniform(10.0, 20.0);
      const double reverse = advance + rng.uniform(10.0, 20.0);
      const double y_drift = rng.uniform(-6.0, 6.0);
      p.ball_move = LinearMove{ball0, Vec2{advance, y_drift * knee},
                               Vec2{-reverse, y_drift * (1.0 - knee)}, knee};
      break;
    }
  }

  for (std::size_t j = 0; j < 5; ++j) {
    const Vec2 start{ball0.x + rng.uniform(-10.0, 4.0), y_slot(j) + rng.uniform(-3.0, 3.0)};
    LinearMove& m = p.home[j];
    m.start = start;
    switch (p.cls) {
      case ActionClass::Shot: {
        const double pull = rng.uniform(0.0, 1.0);
        const Vec2 target{p.shot_ball.target.x - 6.0 - 4.0 * pull, y_slot(j)};
        m = LinearMove{start, Vec2{target.x - start.x, target.y - start.y}, Vec2{0, 0}, 1.0};
        break;
      }
      case ActionClass::Foul: {
        m = LinearMove{start, Vec2{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)}, Vec2{0, 0},
                       knee};
        break;
      }
      case ActionClass::LostBall: {
        m = LinearMove{start, Vec2{rng.uniform(8.0, 16.0), rng.uniform(-3.0, 3.0)}, Vec2{0, 0},
                       1.0};
        break;
      }
    }
  }
  for (std::size_t j = 0; j < 5; ++j) {
    const Vec2 start{ball0.x + rng.uniform(6.0, 14.0), y_slot(j) + rng.uniform(-3.0, 3.0)};
    LinearMove& m = p.away[j];
    switch (p.cls) {
      case ActionClass::Shot: {
        const double pull = rng.uniform(0.0, 1.0);
        const Vec2 target{p.shot_ball.target.x - 2.0 - 2.0 * pull,
                          0.5 * (y_slot(j) + p.shot_ball.target.y)};
        m = LinearMove{start, Vec2{target.x - start.x, target.y - start.y}, Vec2{0, 0}, 1.0};
        break;
      }
      case ActionClass::Foul: {
        if (j == 0) {
          // defender converging on the contact point
          const Vec2 contact{p.ball_move.start.x + p.ball_move.d1.x + 1.5,
                             p.ball_move.start.y + p.ball_move.d1.y};
          m = LinearMove{start, Vec2{contact.x - start.x, contact.y - start.y}, Vec2{0, 0}, knee};
        } else {
          m = LinearMove{start, Vec2{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)}, Vec2{0, 0},
                         knee};
        }
        break;
      }
      case ActionClass::LostBall: {
        const double track = rng.uniform(4.0, 10.0);
        const double chase = rng.uniform(15.0, 25.0);
        const double dy = rng.uniform(-3.0, 3.0);
        m = LinearMove{start, Vec2{track, dy * knee}, Vec2{-chase, dy * (1.0 - knee)}, knee};
        break;
      }
    }
  }
  return p;
}

Frame synth_exact_frame(const SynthEventParams& p, std::size_t k, double t) {
  const double tau = static_cast<double>(k + 1) / static_cast<double>(p.n_frames);
  Frame f;
  f.t = t;
  f.ball = p.cls == ActionClass::Shot ? eval_shot_ball(p.shot_ball, tau)
                                      : eval_linear_move(p.ball_move, tau);
  f.home.resize(5);
  f.away.resize(5);
  for (std::size_t j = 0; j < 5; ++j) {
    f.home[j] = eval_linear_move(p.home[j], tau);
    f.away[j] = eval_linear_move(p.away[j], tau);
  }
  return f;
}

SynthData generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);

  // Interleave classes, cycling the raw tags within each class so per-tag
  // censuses exercise the full vocabulary.
  std::vector<ActionTag> plan;
  const ActionTag shot_tags[] = {ActionTag::Make, ActionTag::Miss};
  const ActionTag lost_tags[] = {ActionTag::OutOfBound, ActionTag::Turnover, ActionTag::Steal};
  for (std::size_t i = 0; i < cfg.n_events_per_class; ++i) {
    plan.push_back(shot_tags[i % 2]);
    plan.push_back(ActionTag::Foul);
    plan.push_back(lost_tags[i % 3]);
  }
  for (std::size_t i = plan.size(); i > 1; --i) {
    std::swap(plan[i - 1], plan[rng.below(i)]);
  }

  SynthData out;
  out.actions.push_back(PbpAction{0.0, 1, ActionTag::Make});  // opens the stream; labels nothing
  std::size_t global_frame = 0;
  const double fr = cfg.spec.frame_rate;
  for (const ActionTag tag : plan) {
    const SynthEventParams params = draw_event_params(tag, rng, cfg);
    for (std::size_t k = 0; k < params.n_frames; ++k) {
      ++global_frame;
      const double t = static_cast<double>(global_frame) / fr;
      Frame f = synth_exact_frame(params, k, t);
      if (cfg.noise_sigma > 0.0) {
        auto jitter = [&](Vec2& p) {
          p.x += cfg.noise_sigma * rng.normal();
          p.y += cfg.noise_sigma * rng.normal();
        };
        jitter(f.ball);
        for (auto& p : f.home) jitter(p);
        for (auto& p : f.away) jitter(p);
      }
      out.frames.push_back(std::move(f));
    }
    out.actions.push_back(
        PbpAction{static_cast<double>(global_frame) / fr, 1, tag});
  }
  return out;
}

ActionClass rule_classify_event(const Event& e) {
  const auto& frames = e.frames;
  if (frames.size() < 5) return ActionClass::Shot;
  const double dx = frames.back().ball.x - frames.front().ball.x;
  if (dx < -5.0) return ActionClass::LostBall;
  double total_speed = 0.0;
  double tail_speed = 0.0;
  const std::size_t n = frames.size();
  const std::size_t tail_start = n - std::max<std::size_t>(2, n / 5);
  std::size_t tail_count = 0;
  for (std::size_t i = 1; i < n; ++i) {
    const double vx = frames[i].ball.x - frames[i - 1].ball.x;
    const double vy = frames[i].ball.y - frames[i - 1].ball.y;
    const double speed = std::sqrt(vx * vx + vy * vy);
    total_speed += speed;
    if (i >= tail_start) {
      tail_speed += speed;
      ++tail_count;
    }
  }
  const double mean_total = total_speed / static_cast<double>(n - 1);
  const double mean_tail = tail_speed / static_cast<double>(tail_count);
  if (mean_total > 0.0 && mean_tail < 0.2 * mean_total) return ActionClass::Foul;
  return ActionClass::Shot;
}

void write_tracking_file(const std::string& path, const std::vector<Frame>& frames) {
  std::ofstream outf(path);
  if (!outf) throw std::runtime_error("cannot open for writing: " + path);
  char buf[64];
  for (const Frame& f : frames) {
    outf << "{\"t\": ";
    std::snprintf(buf, sizeof buf, "%.4f", f.t);
    outf << buf << ", \"ball\": [";
    std::snprintf(buf, sizeof buf, "%.4f, %.4f", f.ball.x, f.ball.y);
    outf << buf << "], \"home\": [";
    for (std::size_t j = 0; j < f.home.size(); ++j) {
      std::snprintf(buf, sizeof buf, "[%.4f, %.4f]", f.home[j].x, f.home[j].y);
      outf << (j ? ", " : "") << buf;
    }
    outf << "], \"away\": [";
    for (std::size_t j = 0; j < f.away.size(); ++j) {
      std::snprintf(buf, sizeof buf, "[%.4f, %.4f]", f.away[j].x, f.away[j].y);
      outf << (j ? ", " : "") << buf;
    }
    outf << "]}\n";
  }
}

void write_pbp_file(const std::string& path, const std::vector<PbpAction>& actions) {
  std::ofstream outf(path);
  if (!outf) throw std::runtime_error("cannot open for writing: " + path);
  outf << "t,period,action\n";
  char buf[32];
  for (const PbpAction& a : actions) {
    std::snprintf(buf, sizeof buf, "%.4f", a.t);
    outf << buf << "," << a.period << "," << to_string(a.tag) << "\n";
  }
}

}  // namespace courtseq
