#include "storesense/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <tuple>

#include <fmt/core.h>

#include "json.hpp"
#include "storesense/detectors.hpp"
#include "storesense/error.hpp"

namespace storesense {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

void validate_noise(const NoiseModel& n) {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw ScenarioError(fmt::format("noise {} must lie in [0, 1]", name));
  };
  prob(n.dropout_prob, "dropout_prob");
  prob(n.misclass_prob, "misclass_prob");
  prob(n.type_flip_prob, "type_flip_prob");
  if (!(n.pos_sigma >= 0.0) || !(n.yaw_sigma >= 0.0)) throw ScenarioError("noise sigmas must be >= 0");
}

BBox2D ImageModel::project(const Vec3& p) const {
  const double w = scale_px_per_m * person_w_m;
  const double h = scale_px_per_m * person_h_m;
  return {u0 + scale_px_per_m * p.x - w / 2, v0 + scale_px_per_m * p.z - h / 2, w, h};
}

// --- scenario parsing ------------------------------------------------------------

namespace {

[[noreturn]] void bad(const std::string& what) { throw ScenarioError(what); }

const json& need(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) bad(fmt::format("{}: missing field {}", where, key));
  return *it;
}

double num(const json& v, const std::string& where) {
  if (!v.is_number()) bad(fmt::format("{}: expected a number", where));
  return v.get<double>();
}

std::int64_t integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) bad(fmt::format("{}: expected an integer", where));
  return v.get<std::int64_t>();
}

Vec3 vec3(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3) bad(fmt::format("{}: expected [x, y, z]", where));
  return {num(v[0], where), num(v[1], where), num(v[2], where)};
}

double num_or(const json& j, const char* key, double fallback, const std::string& where) {
  auto it = j.find(key);
  return it == j.end() ? fallback : num(*it, fmt::format("{}.{}", where, key));
}

ItemZone parse_zone(const json& z) {
  ItemZone zone;
  zone.zone_id = static_cast<int>(integer(need(z, "zone_id", "zone"), "zone.zone_id"));
  zone.center3d = vec3(need(z, "center", "zone"), "zone.center");
  const json& r = need(z, "rect2d", "zone");
  if (!r.is_array() || r.size() != 4) bad("zone.rect2d: expected [x, y, w, h]");
  zone.rect2d = {num(r[0], "zone.rect2d"), num(r[1], "zone.rect2d"), num(r[2], "zone.rect2d"),
                 num(r[3], "zone.rect2d")};
  zone.half_extent = num(need(z, "half_extent", "zone"), "zone.half_extent");
  for (const auto& id : need(z, "item_ids", "zone")) zone.item_ids.push_back(integer(id, "zone.item_ids"));
  if (!(zone.half_extent > 0)) bad("zone.half_extent must be > 0");
  if (zone.item_ids.empty()) bad("zone.item_ids must be non-empty");
  if (!(zone.rect2d.w > 0 && zone.rect2d.h > 0)) bad("zone.rect2d width and height must be positive");
  return zone;
}

AgentAction parse_action(const json& a, const std::string& where) {
  const std::string kind = need(a, "kind", where).get<std::string>();
  if (kind == "approach") return ApproachZone{num(need(a, "t", where), where)};
  if (kind == "leave") return LeaveZone{num(need(a, "t", where), where)};
  if (kind == "pick") {
    return PickItem{num(need(a, "t", where), where), num(need(a, "duration", where), where),
                    integer(need(a, "item", where), where)};
  }
  if (kind == "face") {
    FaceToward f{num(need(a, "t", where), where), Vec3{}};
    if (a.contains("point")) f.target = vec3(a.at("point"), where);
    else f.target = integer(need(a, "person", where), where);
    return f;
  }
  if (kind == "formation") {
    JoinFormation f;
    f.t_start = num(need(a, "t_start", where), where);
    f.t_end = num(need(a, "t_end", where), where);
    for (const auto& p : need(a, "partners", where)) f.partners.push_back(integer(p, where));
    try {
      f.group_type = group_type_from_string(need(a, "type", where).get<std::string>());
    } catch (const ParseError& e) {
      bad(fmt::format("{}: {}", where, e.what()));
    }
    return f;
  }
  bad(fmt::format("{}: unknown action kind '{}'", where, kind));
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    bad(fmt::format("scenario is not valid JSON: {}", e.what()));
  }
}

}  // namespace

ItemZone zone_from_json_text(std::string_view text) {
  const json j = parse_json(text);
  return parse_zone(j.contains("zone") ? j.at("zone") : j);
}

Scenario scenario_from_json_text(std::string_view text) {
  const json j = parse_json(text);
  if (!j.is_object()) bad("scenario must be a JSON object");
  Scenario s;
  try {
    s.name = j.value("name", std::string("scenario"));
    s.emit_picking_flag = j.value("emit_picking_flag", false);
  } catch (const json::exception&) {
    bad("scenario name / emit_picking_flag have the wrong type");
  }
  s.t_start = num(need(j, "t_start", "scenario"), "t_start");
  s.t_end = num(need(j, "t_end", "scenario"), "t_end");
  if (!(s.t_start >= 0 && s.t_end >= s.t_start)) bad("scenario needs 0 <= t_start <= t_end");
  s.zone = parse_zone(need(j, "zone", "scenario"));
  if (auto it = j.find("image"); it != j.end()) {
    s.image.scale_px_per_m = num_or(*it, "scale_px_per_m", s.image.scale_px_per_m, "image");
    if (auto o = it->find("origin_px"); o != it->end()) {
      s.image.u0 = num(o->at(0), "image.origin_px");
      s.image.v0 = num(o->at(1), "image.origin_px");
    }
    if (auto p = it->find("person_size_m"); p != it->end()) {
      s.image.person_w_m = num(p->at(0), "image.person_size_m");
      s.image.person_h_m = num(p->at(1), "image.person_size_m");
    }
  }
  if (auto it = j.find("noise"); it != j.end()) {
    s.noise.pos_sigma = num_or(*it, "pos_sigma", 0.0, "noise");
    s.noise.yaw_sigma = num_or(*it, "yaw_sigma", 0.0, "noise");
    s.noise.dropout_prob = num_or(*it, "dropout_prob", 0.0, "noise");
    s.noise.misclass_prob = num_or(*it, "misclass_prob", 0.0, "noise");
    s.noise.type_flip_prob = num_or(*it, "type_flip_prob", 0.0, "noise");
  }
  validate_noise(s.noise);
  const json& agents = need(j, "agents", "scenario");
  if (!agents.is_array()) bad("scenario.agents must be an array");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const json& a = agents[i];
    const std::string where = fmt::format("agents[{}]", i);
    AgentScript script;
    script.person_id = integer(need(a, "id", where), where + ".id");
    try {
      script.person_type = person_type_from_string(a.value("type", std::string("customer")));
    } catch (const ParseError& e) {
      bad(fmt::format("{}: {}", where, e.what()));
    }
    for (const auto& w : need(a, "waypoints", where)) {
      if (!w.is_array() || w.size() != 4) bad(fmt::format("{}: waypoint must be [t, x, y, z]", where));
      script.waypoints.push_back(
          Waypoint{num(w[0], where), {num(w[1], where), num(w[2], where), num(w[3], where)}});
    }
    if (auto acts = a.find("actions"); acts != a.end()) {
      for (const auto& act : *acts) script.actions.push_back(parse_action(act, where + ".actions"));
    }
    s.agents.push_back(std::move(script));
  }
  return s;
}

Scenario load_scenario(const std::string& path) { return scenario_from_json_text(read_text_file(path)); }

// --- generation -------------------------------------------------------------------

namespace {

constexpr double kEps = 1e-9;
constexpr double kSpacing = 1.0;
constexpr double kSideBySideTurn = std::numbers::pi / 6.0;

struct Pose {
  Vec3 pos;
  double yaw{0.0};
};

GroundVec heading(double yaw) { return {std::cos(yaw), std::sin(yaw)}; }

double yaw_toward(const Vec3& from, const Vec3& to) {
  const double dx = to.x - from.x;
  const double dz = to.z - from.z;
  if (dx == 0.0 && dz == 0.0) return 0.0;
  return std::atan2(dz, dx);
}

Vec3 offset(const Vec3& p, const GroundVec& dir, double d) { return {p.x + d * dir.x, p.y, p.z + d * dir.z}; }

bool present(const AgentScript& a, double t) {
  return t >= a.waypoints.front().t - kEps && t <= a.waypoints.back().t + kEps;
}

Vec3 interpolate(const AgentScript& a, double t) {
  const auto& w = a.waypoints;
  if (t <= w.front().t) return w.front().pos;
  if (t >= w.back().t) return w.back().pos;
  auto hi = std::upper_bound(w.begin(), w.end(), t, [](double v, const Waypoint& p) { return v < p.t; });
  auto lo = hi - 1;
  const double f = (t - lo->t) / (hi->t - lo->t);
  return {lo->pos.x + f * (hi->pos.x - lo->pos.x), lo->pos.y + f * (hi->pos.y - lo->pos.y),
          lo->pos.z + f * (hi->pos.z - lo->pos.z)};
}

void validate_scripts(const Scenario& s) {
  std::map<PersonId, const AgentScript*> by_id;
  for (const auto& a : s.agents) {
    if (a.person_id < 0) bad(fmt::format("agent {}: person_id must be >= 0", a.person_id));
    if (!by_id.emplace(a.person_id, &a).second) bad(fmt::format("agent {}: duplicate person_id", a.person_id));
    if (a.waypoints.empty()) bad(fmt::format("agent {}: needs at least one waypoint", a.person_id));
    for (std::size_t i = 1; i < a.waypoints.size(); ++i) {
      if (!(a.waypoints[i].t > a.waypoints[i - 1].t)) {
        bad(fmt::format("agent {}: waypoint times must increase", a.person_id));
      }
    }
  }
  std::map<PersonId, std::vector<std::pair<double, double>>> formation_spans;
  for (const auto& a : s.agents) {
    const double lo = a.waypoints.front().t - kEps;
    const double hi = a.waypoints.back().t + kEps;
    auto within = [&](double t, const char* what) {
      if (t < lo || t > hi) bad(fmt::format("agent {}: {} at t={} outside its waypoint range", a.person_id, what, t));
    };
    std::vector<std::pair<double, double>> picks;
    for (const auto& act : a.actions) {
      if (const auto* x = std::get_if<ApproachZone>(&act)) within(x->t, "approach");
      else if (const auto* x = std::get_if<LeaveZone>(&act)) within(x->t, "leave");
      else if (const auto* x = std::get_if<FaceToward>(&act)) {
        within(x->t, "face");
        if (const auto* who = std::get_if<PersonId>(&x->target); who && !by_id.count(*who)) {
          bad(fmt::format("agent {}: faces unknown agent {}", a.person_id, *who));
        }
      } else if (const auto* x = std::get_if<PickItem>(&act)) {
        within(x->t, "pick");
        within(x->t + x->duration, "pick end");
        if (!(x->duration > 0)) bad(fmt::format("agent {}: pick duration must be > 0", a.person_id));
        if (std::find(s.zone.item_ids.begin(), s.zone.item_ids.end(), x->item_id) == s.zone.item_ids.end()) {
          bad(fmt::format("agent {}: item {} is not on the table", a.person_id, x->item_id));
        }
        picks.emplace_back(x->t, x->t + x->duration);
      } else if (const auto* x = std::get_if<JoinFormation>(&act)) {
        within(x->t_start, "formation start");
        within(x->t_end, "formation end");
        if (!(x->t_start < x->t_end)) bad(fmt::format("agent {}: formation needs t_start < t_end", a.person_id));
        const std::size_t members = x->partners.size() + 1;
        if (members < 2) bad(fmt::format("agent {}: formation without partners", a.person_id));
        if ((x->group_type == GroupType::Circular) != (members > 2)) {
          bad(fmt::format("agent {}: {} formation cannot have {} members", a.person_id, to_string(x->group_type),
                          members));
        }
        std::vector<PersonId> ids = x->partners;
        ids.push_back(a.person_id);
        for (PersonId p : ids) {
          auto it = by_id.find(p);
          if (it == by_id.end()) bad(fmt::format("agent {}: unknown formation partner {}", a.person_id, p));
          if (!present(*it->second, x->t_start) || !present(*it->second, x->t_end - kEps)) {
            bad(fmt::format("agent {}: partner {} absent during the formation", a.person_id, p));
          }
          formation_spans[p].emplace_back(x->t_start, x->t_end);
        }
      }
    }
    std::sort(picks.begin(), picks.end());
    for (std::size_t i = 1; i < picks.size(); ++i) {
      if (picks[i].first < picks[i - 1].second) bad(fmt::format("agent {}: overlapping picks", a.person_id));
    }
  }
  for (auto& [id, spans] : formation_spans) {
    std::sort(spans.begin(), spans.end());
    for (std::size_t i = 1; i < spans.size(); ++i) {
      if (spans[i].first < spans[i - 1].second) bad(fmt::format("agent {}: in two formations at once", id));
    }
  }
}

double base_yaw(const AgentScript& a, double t, const Vec3& pos, const ItemZone& zone,
                const std::map<PersonId, const AgentScript*>& by_id) {
  const FaceToward* latest = nullptr;
  for (const auto& act : a.actions) {
    const auto* f = std::get_if<FaceToward>(&act);
    if (f && f->t <= t + kEps && (!latest || f->t >= latest->t)) latest = f;
  }
  if (!latest) return yaw_toward(pos, zone.center3d);
  if (const auto* p = std::get_if<Vec3>(&latest->target)) return yaw_toward(pos, *p);
  return yaw_toward(pos, interpolate(*by_id.at(std::get<PersonId>(latest->target)), t));
}

// Partner poses for a formation anchored at `anchor`.
std::vector<Pose> formation_poses(const Pose& anchor, const JoinFormation& f, const std::vector<double>& partner_y) {
  const GroundVec fwd = heading(anchor.yaw);
  const GroundVec left{-fwd.z, fwd.x};
  std::vector<Pose> out;
  switch (f.group_type) {
    case GroupType::VisVis:
      out.push_back({offset(anchor.pos, fwd, kSpacing), wrap_angle(anchor.yaw + std::numbers::pi)});
      break;
    case GroupType::SideBySide:
      out.push_back({offset(anchor.pos, left, kSpacing), wrap_angle(anchor.yaw - kSideBySideTurn)});
      break;
    case GroupType::LShape: {
      const double d = kSpacing / std::sqrt(2.0);
      out.push_back({offset(offset(anchor.pos, fwd, d), left, -d), wrap_angle(anchor.yaw + std::numbers::pi / 2)});
      break;
    }
    case GroupType::Circular: {
      const auto n = static_cast<double>(f.partners.size() + 1);
      const double r = (kSpacing / 2.0) / std::sin(std::numbers::pi / n);
      const Vec3 center = offset(anchor.pos, fwd, r);
      for (std::size_t j = 1; j <= f.partners.size(); ++j) {
        const double angle = anchor.yaw + std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(j) / n;
        const Vec3 p = offset(center, heading(angle), r);
        out.push_back({p, wrap_angle(angle + std::numbers::pi)});
      }
      break;
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].pos.y = partner_y[i];
  return out;
}

bool active_pick(const AgentScript& a, double t, ItemId& item) {
  for (const auto& act : a.actions) {
    const auto* p = std::get_if<PickItem>(&act);
    if (p && t >= p->t - kEps && t < p->t + p->duration - kEps) {
      item = p->item_id;
      return true;
    }
  }
  return false;
}

double distance3(const Vec3& a, const Vec3& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

void check_detectable(const Scenario& s, const PipelineConfig& cfg,
                      const std::map<PersonId, std::vector<PersonSnapshot>>& tracks) {
  for (const auto& a : s.agents) {
    auto it = tracks.find(a.person_id);
    static const std::vector<PersonSnapshot> kEmpty;
    const auto& obs = it == tracks.end() ? kEmpty : it->second;
    auto detectable = [&](double t0, auto&& rule) {
      for (std::size_t j = 0; j < obs.size(); ++j) {
        if (obs[j].t < t0 - kEps || obs[j].t > t0 + cfg.t_match + kEps) continue;
        if (rule(std::span<const PersonSnapshot>(obs.data(), j + 1))) return true;
      }
      return false;
    };
    for (const auto& act : a.actions) {
      if (const auto* x = std::get_if<ApproachZone>(&act)) {
        const bool ok = detectable(x->t, [&](std::span<const PersonSnapshot> h) {
          return approach_step(h, BehaviorState::Idle, s.zone, cfg).has_value();
        });
        if (!ok) {
          bad(fmt::format("agent {}: approach at t={} never comes within approach_distance of the zone for a full "
                          "window",
                          a.person_id, x->t));
        }
      } else if (const auto* x = std::get_if<LeaveZone>(&act)) {
        const bool ok = detectable(x->t, [&](std::span<const PersonSnapshot> h) {
          return leave_step(h, BehaviorState::Idle, s.zone, cfg).has_value();
        });
        if (!ok) {
          bad(fmt::format("agent {}: leave at t={} never goes beyond leave_distance for a full window", a.person_id,
                          x->t));
        }
      } else if (const auto* x = std::get_if<PickItem>(&act)) {
        const auto frames = std::count_if(obs.begin(), obs.end(), [&](const PersonSnapshot& o) {
          return o.t >= x->t - kEps && o.t < x->t + x->duration - kEps;
        });
        if (frames < std::max(cfg.pick_streak, cfg.pick_votes)) {
          bad(fmt::format("agent {}: pick at t={} is too short to be recognised", a.person_id, x->t));
        }
        if (frames >= 2 * cfg.pick_streak) {
          bad(fmt::format("agent {}: pick at t={} is long enough to be recognised twice; split it", a.person_id,
                          x->t));
        }
      }
    }
  }
}

}  // namespace

SceneOutput generate_scene(const Scenario& scenario, const PipelineConfig& cfg, std::uint64_t seed) {
  validate_config(cfg);
  validate_noise(scenario.noise);
  validate_scripts(scenario);

  std::map<PersonId, const AgentScript*> by_id;
  for (const auto& a : scenario.agents) by_id.emplace(a.person_id, &a);

  SceneOutput out;
  std::map<PersonId, std::vector<PersonSnapshot>> tracks;
  for (std::int64_t i = 0;; ++i) {
    const double t = scenario.t_start + static_cast<double>(i) / cfg.frame_rate;
    if (t > scenario.t_end + kEps) break;

    std::map<PersonId, Pose> poses;
    for (const auto& [id, a] : by_id) {
      if (!present(*a, t)) continue;
      const Vec3 p = interpolate(*a, t);
      poses[id] = Pose{p, base_yaw(*a, t, p, scenario.zone, by_id)};
    }
    std::map<PersonId, Pose> placed;
    for (const auto& [id, a] : by_id) {
      if (!poses.count(id)) continue;
      for (const auto& act : a->actions) {
        const auto* f = std::get_if<JoinFormation>(&act);
        if (!f || t < f->t_start - kEps || t >= f->t_end - kEps) continue;
        std::vector<double> ys;
        for (PersonId p : f->partners) ys.push_back(poses.at(p).pos.y);
        const auto partner_poses = formation_poses(poses.at(id), *f, ys);
        for (std::size_t k = 0; k < f->partners.size(); ++k) placed[f->partners[k]] = partner_poses[k];
      }
    }
    for (auto& [id, pose] : placed) poses[id] = pose;

    TraceFrame frame{t, i, {}};
    for (const auto& [id, pose] : poses) {
      const AgentScript& a = *by_id.at(id);
      Observation o;
      o.t = t;
      o.frame = i;
      o.person_id = id;
      o.person_type = a.person_type;
      o.pos3d = pose.pos;
      o.bbox = scenario.image.project(pose.pos);
      o.head = HeadPose{wrap_angle(pose.yaw), 0.0, 0.0};

      const GroundVec fwd = heading(pose.yaw);
      const GroundVec left{-fwd.z, fwd.x};
      ArmKeypoints arms;
      arms.left_wrist = offset(pose.pos, left, 0.25);
      arms.right_wrist = offset(pose.pos, left, -0.25);
      arms.left_elbow = offset(pose.pos, left, 0.2);
      arms.right_elbow = offset(pose.pos, left, -0.2);
      ItemId item = 0;
      const bool picking = active_pick(a, t, item);
      if (picking) {
        arms.right_wrist = scenario.zone.center3d;
        o.held_item = item;
      } else {
        for (const auto& w : {*arms.left_wrist, *arms.right_wrist}) {
          if (distance3(w, scenario.zone.center3d) <= cfg.pick_radius) {
            bad(fmt::format("agent {}: hands reach the items at t={} without a scripted pick", id, t));
          }
        }
      }
      o.arms = arms;
      if (scenario.emit_picking_flag) o.picking_flag = picking;
      tracks[id].push_back(o);
      frame.observations.push_back(std::move(o));
    }
    out.trace.push_back(std::move(frame));
  }

  check_detectable(scenario, cfg, tracks);

  for (const auto& a : scenario.agents) {
    for (const auto& act : a.actions) {
      if (const auto* x = std::get_if<ApproachZone>(&act)) {
        out.truth.events.push_back({x->t, a.person_id, BehaviorState::Approach, std::nullopt});
      } else if (const auto* x = std::get_if<PickItem>(&act)) {
        out.truth.events.push_back({x->t, a.person_id, BehaviorState::Pick, x->item_id});
      } else if (const auto* x = std::get_if<LeaveZone>(&act)) {
        out.truth.events.push_back({x->t, a.person_id, BehaviorState::Leave, std::nullopt});
      } else if (const auto* x = std::get_if<JoinFormation>(&act)) {
        std::vector<PersonId> members = x->partners;
        members.push_back(a.person_id);
        std::sort(members.begin(), members.end());
        out.truth.groups.push_back({x->t_start, x->t_end, std::move(members), x->group_type});
      }
    }
  }
  std::sort(out.truth.events.begin(), out.truth.events.end(), [](const auto& a, const auto& b) {
    return std::make_tuple(a.t, a.person_id, a.event) < std::make_tuple(b.t, b.person_id, b.event);
  });
  std::sort(out.truth.groups.begin(), out.truth.groups.end(), [](const auto& a, const auto& b) {
    return std::tie(a.t_start, a.member_ids) < std::tie(b.t_start, b.member_ids);
  });

  if (!scenario.noise.is_zero()) out.trace = apply_noise(out.trace, scenario.noise, seed, scenario.zone.item_ids);
  return out;
}

Trace apply_noise(const Trace& trace, const NoiseModel& noise, std::uint64_t seed, std::span<const ItemId> item_ids) {
  validate_noise(noise);
  if (noise.is_zero()) return trace;
  Trace out;
  out.reserve(trace.size());
  for (const auto& f : trace) {
    TraceFrame nf{f.t, f.frame, {}};
    for (const auto& o : f.observations) {
      const std::uint64_t stream =
          splitmix64(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(f.frame))) ^
                     static_cast<std::uint64_t>(o.person_id));
      std::mt19937_64 rng(stream);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      if (unit(rng) < noise.dropout_prob) continue;
      Observation n = o;
      if (noise.pos_sigma > 0) {
        std::normal_distribution<double> jitter(0.0, noise.pos_sigma);
        n.pos3d.x += jitter(rng);
        n.pos3d.y += jitter(rng);
        n.pos3d.z += jitter(rng);
      }
      if (noise.yaw_sigma > 0) {
        std::normal_distribution<double> jitter(0.0, noise.yaw_sigma);
        n.head.yaw = wrap_angle(n.head.yaw + jitter(rng));
      }
      if (n.held_item && unit(rng) < noise.misclass_prob) {
        std::vector<ItemId> others;
        for (ItemId id : item_ids) {
          if (id != *n.held_item) others.push_back(id);
        }
        if (!others.empty()) {
          std::uniform_int_distribution<std::size_t> pick(0, others.size() - 1);
          n.held_item = others[pick(rng)];
        }
      }
      if (unit(rng) < noise.type_flip_prob) {
        n.person_type = n.person_type == PersonType::Customer ? PersonType::Staff : PersonType::Customer;
      }
      nf.observations.push_back(std::move(n));
    }
    out.push_back(std::move(nf));
  }
  return out;
}

}  // namespace storesense
