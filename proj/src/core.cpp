#include "storesense/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <fmt/core.h>

#include "json.hpp"
#include "storesense/error.hpp"

namespace storesense {

namespace {

void require(bool ok, std::string_view invariant) {
  if (!ok) throw ConfigError(fmt::format("{} violated", invariant));
}

// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct Civil {
  std::int64_t year;
  unsigned month;
  unsigned day;
};

Civil civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return {static_cast<std::int64_t>(yoe) + era * 400 + (m <= 2), m, d};
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t parse_origin(std::string_view iso) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  char tail = 0;
  const std::string text(iso);
  const int n = std::sscanf(text.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &y, &mo, &d, &h, &mi, &s, &tail);
  if (n != 6 || mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 59 || h < 0 ||
      mi < 0 || s < 0) {
    throw ConfigError(fmt::format("clock_origin '{}' is not YYYY-MM-DDTHH:MM:SS", iso));
  }
  return days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * 86400 +
         h * 3600 + mi * 60 + s;
}

}  // namespace

const PipelineConfig& validate_config(const PipelineConfig& cfg) {
  require(cfg.window_frames >= 1, "window_frames >= 1");
  require(cfg.approach_3d_count >= 1, "approach_3d_count >= 1");
  require(cfg.approach_2d_count >= 1, "approach_2d_count >= 1");
  require(cfg.pick_streak >= 1, "pick_streak >= 1");
  require(cfg.pick_votes >= 1, "pick_votes >= 1");
  require(cfg.leave_window >= 1, "leave_window >= 1");
  require(cfg.leave_3d_count >= 1, "leave_3d_count >= 1");
  require(cfg.leave_2d_count >= 1, "leave_2d_count >= 1");
  require(cfg.approach_3d_count <= cfg.window_frames, "approach_3d_count <= window_frames");
  require(cfg.approach_2d_count <= cfg.window_frames, "approach_2d_count <= window_frames");
  require(cfg.leave_3d_count <= cfg.leave_window, "leave_3d_count <= leave_window");
  require(cfg.leave_2d_count <= cfg.leave_window, "leave_2d_count <= leave_window");

  const double reals[] = {cfg.approach_distance, cfg.leave_distance, cfg.group_angle_low,
                          cfg.group_angle_high,  cfg.d_pair,         cfg.stride_r,
                          cfg.eps_o,             cfg.pick_radius,    cfg.t_absent,
                          cfg.t_match,           cfg.frame_rate,     cfg.group_tick,
                          cfg.group_join_window};
  require(std::all_of(std::begin(reals), std::end(reals), [](double v) { return std::isfinite(v); }),
          "all parameters finite");

  require(cfg.group_angle_low > 0.0, "0 < group_angle_low");
  require(cfg.group_angle_low < cfg.group_angle_high, "group_angle_low < group_angle_high");
  require(cfg.group_angle_high < std::numbers::pi, "group_angle_high < pi");
  require(cfg.approach_distance > 0.0, "approach_distance > 0");
  require(cfg.leave_distance > 0.0, "leave_distance > 0");
  require(cfg.d_pair > 0.0, "d_pair > 0");
  require(cfg.stride_r > 0.0, "stride_r > 0");
  require(cfg.eps_o > 0.0, "eps_o > 0");
  require(cfg.pick_radius > 0.0, "pick_radius > 0");
  require(cfg.t_absent > 0.0, "t_absent > 0");
  require(cfg.t_match > 0.0, "t_match > 0");
  require(cfg.frame_rate > 0.0, "frame_rate > 0");
  require(cfg.group_tick > 0.0, "group_tick > 0");
  require(cfg.group_join_window >= 0.0, "group_join_window >= 0");
  parse_origin(cfg.clock_origin);
  return cfg;
}

namespace {

using nlohmann::ordered_json;

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(fmt::format("config key '{}' has the wrong type", key));
  }
}

}  // namespace

PipelineConfig config_from_json_text(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  PipelineConfig cfg;
  for (const auto& [key, value] : j.items()) {
    const char* k = key.c_str();
    if (key == "window_frames") read_field(j, k, cfg.window_frames);
    else if (key == "approach_distance") read_field(j, k, cfg.approach_distance);
    else if (key == "approach_3d_count") read_field(j, k, cfg.approach_3d_count);
    else if (key == "approach_2d_count") read_field(j, k, cfg.approach_2d_count);
    else if (key == "pick_streak") read_field(j, k, cfg.pick_streak);
    else if (key == "pick_votes") read_field(j, k, cfg.pick_votes);
    else if (key == "leave_window") read_field(j, k, cfg.leave_window);
    else if (key == "leave_distance") read_field(j, k, cfg.leave_distance);
    else if (key == "leave_3d_count") read_field(j, k, cfg.leave_3d_count);
    else if (key == "leave_2d_count") read_field(j, k, cfg.leave_2d_count);
    else if (key == "group_angle_low") read_field(j, k, cfg.group_angle_low);
    else if (key == "group_angle_high") read_field(j, k, cfg.group_angle_high);
    else if (key == "d_pair") read_field(j, k, cfg.d_pair);
    else if (key == "stride_r") read_field(j, k, cfg.stride_r);
    else if (key == "eps_o") read_field(j, k, cfg.eps_o);
    else if (key == "pick_radius") read_field(j, k, cfg.pick_radius);
    else if (key == "t_absent") read_field(j, k, cfg.t_absent);
    else if (key == "t_match") read_field(j, k, cfg.t_match);
    else if (key == "frame_rate") read_field(j, k, cfg.frame_rate);
    else if (key == "group_tick") read_field(j, k, cfg.group_tick);
    else if (key == "group_join_window") read_field(j, k, cfg.group_join_window);
    else if (key == "seed") read_field(j, k, cfg.seed);
    else if (key == "clock_origin") read_field(j, k, cfg.clock_origin);
    else throw ConfigError(fmt::format("unknown config key '{}'", key));
  }
  return validate_config(cfg);
}

std::string config_to_json_text(const PipelineConfig& cfg) {
  ordered_json j;
  j["window_frames"] = cfg.window_frames;
  j["approach_distance"] = cfg.approach_distance;
  j["approach_3d_count"] = cfg.approach_3d_count;
  j["approach_2d_count"] = cfg.approach_2d_count;
  j["pick_streak"] = cfg.pick_streak;
  j["pick_votes"] = cfg.pick_votes;
  j["leave_window"] = cfg.leave_window;
  j["leave_distance"] = cfg.leave_distance;
  j["leave_3d_count"] = cfg.leave_3d_count;
  j["leave_2d_count"] = cfg.leave_2d_count;
  j["group_angle_low"] = cfg.group_angle_low;
  j["group_angle_high"] = cfg.group_angle_high;
  j["d_pair"] = cfg.d_pair;
  j["stride_r"] = cfg.stride_r;
  j["eps_o"] = cfg.eps_o;
  j["pick_radius"] = cfg.pick_radius;
  j["t_absent"] = cfg.t_absent;
  j["t_match"] = cfg.t_match;
  j["frame_rate"] = cfg.frame_rate;
  j["group_tick"] = cfg.group_tick;
  j["group_join_window"] = cfg.group_join_window;
  j["seed"] = cfg.seed;
  j["clock_origin"] = cfg.clock_origin;
  return j.dump(2) + "\n";
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open config '{}'", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return config_from_json_text(buffer.str());
}

double ground_distance(const Vec3& a, const Vec3& b) { return std::hypot(a.x - b.x, a.z - b.z); }

double ground_distance(const Vec3& p, const ItemZone& zone) { return ground_distance(p, zone.center3d); }

double norm(const GroundVec& v) { return std::hypot(v.x, v.z); }

GroundVec facing_vector(const HeadPose& head) { return {std::cos(head.yaw), std::sin(head.yaw)}; }

double effort_angle(const GroundVec& u, const GroundVec& v) {
  const double dot = std::clamp(u.x * v.x + u.z * v.z, -1.0, 1.0);
  return std::acos(dot);
}

bool bbox_overlaps(const BBox2D& a, const BBox2D& b) {
  return a.x < b.x + b.w && b.x < a.x + a.w && a.y < b.y + b.h && b.y < a.y + a.h;
}

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a < 0) a += two_pi;
  return a - std::numbers::pi;
}

std::string_view to_string(PersonType t) { return t == PersonType::Customer ? "customer" : "staff"; }

std::string_view to_string(BehaviorState s) {
  switch (s) {
    case BehaviorState::Idle: return "I";
    case BehaviorState::Approach: return "A";
    case BehaviorState::Pick: return "P";
    case BehaviorState::Leave: return "L";
  }
  return "?";
}

std::string_view to_string(GroupType g) {
  switch (g) {
    case GroupType::LShape: return "LShape";
    case GroupType::SideBySide: return "SideBySide";
    case GroupType::VisVis: return "VisVis";
    case GroupType::Circular: return "Circular";
  }
  return "?";
}

PersonType person_type_from_string(std::string_view s) {
  if (s == "customer") return PersonType::Customer;
  if (s == "staff") return PersonType::Staff;
  throw ParseError(fmt::format("unknown person type '{}'", s));
}

BehaviorState state_from_string(std::string_view s) {
  if (s == "I") return BehaviorState::Idle;
  if (s == "A") return BehaviorState::Approach;
  if (s == "P") return BehaviorState::Pick;
  if (s == "L") return BehaviorState::Leave;
  throw ParseError(fmt::format("unknown state '{}'", s));
}

GroupType group_type_from_string(std::string_view s) {
  for (GroupType g : kAllGroupTypes) {
    if (to_string(g) == s) return g;
  }
  throw ParseError(fmt::format("unknown group type '{}'", s));
}

WallClock::WallClock(std::string_view origin_iso) : origin_epoch_(parse_origin(origin_iso)) {}

std::int64_t WallClock::whole_seconds(double t) const {
  // Millisecond snap first so frame times like 33390.999999999996 land on the intended second.
  const auto ms = static_cast<std::int64_t>(std::llround(t * 1000.0));
  return origin_epoch_ + floor_div(ms, 1000);
}

std::string WallClock::table_datetime(double t) const {
  const std::int64_t secs = whole_seconds(t);
  const std::int64_t days = floor_div(secs, 86400);
  const std::int64_t sod = secs - days * 86400;
  const Civil c = civil_from_days(days);
  return fmt::format("{:02}/{:02}/{:04}, {:02}:{:02}:{:02}", c.month, c.day, c.year, sod / 3600,
                     (sod / 60) % 60, sod % 60);
}

int WallClock::hour_of_day(double t) const {
  const std::int64_t secs = whole_seconds(t);
  const std::int64_t sod = secs - floor_div(secs, 86400) * 86400;
  return static_cast<int>(sod / 3600);
}

std::int64_t WallClock::hour_index(double t) const { return floor_div(whole_seconds(t), 3600); }

double WallClock::hour_start(std::int64_t index) const {
  return static_cast<double>(index * 3600 - origin_epoch_);
}

int WallClock::hour_of_day_from_index(std::int64_t index) {
  return static_cast<int>(index - floor_div(index, 24) * 24);
}

}  // namespace storesense
