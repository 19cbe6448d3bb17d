#ifndef STORESENSE_SIMULATOR_HPP
#define STORESENSE_SIMULATOR_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "storesense/trace_io.hpp"

namespace storesense {

struct Waypoint {
  double t{0.0};
  Vec3 pos;
};

struct ApproachZone {
  double t{0.0};
};

struct PickItem {
  double t{0.0};
  double duration{1.0};
  ItemId item_id{0};
};

struct LeaveZone {
  double t{0.0};
};

/// From `t` on, the agent looks at a fixed point or at another agent.
struct FaceToward {
  double t{0.0};
  std::variant<Vec3, PersonId> target;
};

/// The scripting agent anchors a formation over [t_start, t_end): partners are
/// placed around it at 1 m spacing with facings that realise `group_type`.
struct JoinFormation {
  double t_start{0.0};
  double t_end{0.0};
  std::vector<PersonId> partners;
  GroupType group_type{GroupType::LShape};
};

using AgentAction = std::variant<ApproachZone, PickItem, LeaveZone, FaceToward, JoinFormation>;

struct AgentScript {
  PersonId person_id{0};
  PersonType person_type{PersonType::Customer};
  std::vector<Waypoint> waypoints;  // strictly increasing t; present from first to last
  std::vector<AgentAction> actions;
};

struct NoiseModel {
  double pos_sigma{0.0};
  double yaw_sigma{0.0};
  double dropout_prob{0.0};
  double misclass_prob{0.0};
  double type_flip_prob{0.0};

  bool is_zero() const {
    return pos_sigma == 0 && yaw_sigma == 0 && dropout_prob == 0 && misclass_prob == 0 && type_flip_prob == 0;
  }
};

void validate_noise(const NoiseModel& noise);

/// Overhead linear projection from the ground plane to pixels.
struct ImageModel {
  double scale_px_per_m{100.0};
  double u0{500.0};
  double v0{500.0};
  double person_w_m{0.5};
  double person_h_m{0.5};

  BBox2D project(const Vec3& p) const;
};

struct Scenario {
  std::string name;
  double t_start{0.0};
  double t_end{0.0};
  ItemZone zone;
  ImageModel image;
  bool emit_picking_flag{false};
  NoiseModel noise;
  std::vector<AgentScript> agents;
};

Scenario scenario_from_json_text(std::string_view text);
Scenario load_scenario(const std::string& path);
/// Reads only the zone object of a scenario file.
ItemZone zone_from_json_text(std::string_view text);

struct SceneOutput {
  Trace trace;
  GroundTruth truth;
};

/// Samples every agent at cfg.frame_rate over [t_start, t_end], labels one
/// ground-truth event per scripted approach/pick/leave (at the action start)
/// and one group per formation, then applies `scenario.noise`. Throws
/// ScenarioError naming the agent when the scripted geometry cannot produce
/// the scripted behavior.
SceneOutput generate_scene(const Scenario& scenario, const PipelineConfig& cfg, std::uint64_t seed);

/// Independent per-observation perturbation. Misclassified items are drawn
/// from `item_ids` (other than the true one).
Trace apply_noise(const Trace& trace, const NoiseModel& noise, std::uint64_t seed,
                  std::span<const ItemId> item_ids = {});

/// SplitMix64 step; used to derive independent seeded streams.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace storesense

#endif  // STORESENSE_SIMULATOR_HPP
