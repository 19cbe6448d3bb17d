#ifndef STORESENSE_CORE_HPP
#define STORESENSE_CORE_HPP

#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace storesense {

using PersonId = std::int64_t;
using ItemId = std::int64_t;

/// Sensor-frame coordinates in meters. y is vertical; the ground plane is (x, z).
struct Vec3 {
  double x{0.0};
  double y{0.0};
  double z{0.0};

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

/// A direction or point in the ground plane, (x, z) components.
struct GroundVec {
  double x{0.0};
  double z{0.0};

  friend bool operator==(const GroundVec&, const GroundVec&) = default;
};

/// Image-space box in pixels, top-left anchored.
struct BBox2D {
  double x{0.0};
  double y{0.0};
  double w{1.0};
  double h{1.0};

  friend bool operator==(const BBox2D&, const BBox2D&) = default;
};

/// Head orientation in radians.
struct HeadPose {
  double yaw{0.0};
  double pitch{0.0};
  double roll{0.0};

  friend bool operator==(const HeadPose&, const HeadPose&) = default;
};

struct ArmKeypoints {
  std::optional<Vec3> left_wrist;
  std::optional<Vec3> right_wrist;
  std::optional<Vec3> left_elbow;
  std::optional<Vec3> right_elbow;

  friend bool operator==(const ArmKeypoints&, const ArmKeypoints&) = default;
};

enum class PersonType { Customer, Staff };

/// Per-person behavior state: Idle, Approach, Pick, Leave.
enum class BehaviorState { Idle, Approach, Pick, Leave };

enum class GroupType { LShape, SideBySide, VisVis, Circular };

inline constexpr GroupType kAllGroupTypes[] = {GroupType::LShape, GroupType::SideBySide,
                                               GroupType::VisVis, GroupType::Circular};

/// One tracked person's perceived attributes in one frame.
struct Observation {
  double t{0.0};
  std::int64_t frame{0};
  PersonId person_id{0};
  PersonType person_type{PersonType::Customer};
  BBox2D bbox;
  Vec3 pos3d;
  HeadPose head;
  std::optional<ArmKeypoints> arms;
  std::optional<bool> picking_flag;
  std::optional<ItemId> held_item;

  friend bool operator==(const Observation&, const Observation&) = default;
};

/// The item table being watched.
struct ItemZone {
  int zone_id{0};
  Vec3 center3d;
  BBox2D rect2d;
  double half_extent{0.5};
  std::vector<ItemId> item_ids;

  friend bool operator==(const ItemZone&, const ItemZone&) = default;
};

/// Every tunable of the pipeline. Defaults are the grid-searched store values
/// for the detector thresholds; the remaining fields are engine choices.
struct PipelineConfig {
  // approach detection
  int window_frames{7};
  double approach_distance{1.8};
  int approach_3d_count{4};
  int approach_2d_count{5};
  // pick detection
  int pick_streak{8};
  int pick_votes{5};
  // leave detection
  int leave_window{5};
  double leave_distance{4.0};
  int leave_3d_count{5};
  int leave_2d_count{4};
  // F-formation typing thresholds on the effort angle
  double group_angle_low{std::numbers::pi / 3.0};
  double group_angle_high{2.0 * std::numbers::pi / 3.0};
  // pairwise o-space rule
  double d_pair{2.0};
  double stride_r{0.8};
  double eps_o{0.8};

  double pick_radius{0.5};
  double t_absent{3.0};
  double t_match{2.0};
  double frame_rate{10.0};
  double group_tick{1.0};
  double group_join_window{0.5};
  std::uint64_t seed{0};
  /// Wall-clock instant of trace time t = 0, "YYYY-MM-DDTHH:MM:SS".
  std::string clock_origin{"2021-05-31T00:00:00"};

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// Returns `cfg` unchanged or throws ConfigError naming the first violated invariant.
const PipelineConfig& validate_config(const PipelineConfig& cfg);

PipelineConfig config_from_json_text(std::string_view text);
std::string config_to_json_text(const PipelineConfig& cfg);
PipelineConfig load_config(const std::string& path);

/// Largest history any detector inspects.
inline int history_capacity(const PipelineConfig& cfg) {
  return cfg.window_frames > cfg.leave_window ? cfg.window_frames : cfg.leave_window;
}

// --- geometry ---------------------------------------------------------------

inline GroundVec ground(const Vec3& p) { return {p.x, p.z}; }

double ground_distance(const Vec3& a, const Vec3& b);
double ground_distance(const Vec3& p, const ItemZone& zone);
double norm(const GroundVec& v);

/// Unit facing direction from head yaw; yaw = 0 faces +x, yaw = pi/2 faces +z.
GroundVec facing_vector(const HeadPose& head);

/// Angle in [0, pi] between two unit facing directions.
double effort_angle(const GroundVec& u, const GroundVec& v);

/// True when the two boxes share a region of positive area.
bool bbox_overlaps(const BBox2D& a, const BBox2D& b);

/// Wraps an angle into [-pi, pi].
double wrap_angle(double a);

// --- names ------------------------------------------------------------------

std::string_view to_string(PersonType t);
std::string_view to_string(BehaviorState s);
std::string_view to_string(GroupType g);
PersonType person_type_from_string(std::string_view s);
BehaviorState state_from_string(std::string_view s);
GroupType group_type_from_string(std::string_view s);

// --- wall clock -------------------------------------------------------------

/// Maps trace seconds onto a civil date/time.
class WallClock {
 public:
  explicit WallClock(std::string_view origin_iso);

  /// "MM/DD/YYYY, HH:MM:SS" of origin + t, seconds truncated.
  std::string table_datetime(double t) const;
  /// Hour of day of origin + t.
  int hour_of_day(double t) const;
  /// Hours since the Unix epoch of origin + t; orders hours across days.
  std::int64_t hour_index(double t) const;
  /// Trace time at which hour `index` begins.
  double hour_start(std::int64_t index) const;
  static int hour_of_day_from_index(std::int64_t index);

 private:
  std::int64_t whole_seconds(double t) const;

  std::int64_t origin_epoch_{0};
};

}  // namespace storesense

#endif  // STORESENSE_CORE_HPP
