#ifndef STORESENSE_MESSAGES_HPP
#define STORESENSE_MESSAGES_HPP

#include <memory>
#include <variant>
#include <vector>

#include "storesense/core.hpp"
#include "storesense/trace_io.hpp"

namespace storesense {

/// What the base layer hands upward for one person in one frame.
using PersonSnapshot = Observation;

enum class LeaveCause { Departed, Absent };

struct FrameMsg {
  std::shared_ptr<const TraceFrame> frame;
};

struct SnapshotMsg {
  PersonSnapshot snapshot;
  /// This person's recent snapshots, oldest first, `snapshot` last.
  std::shared_ptr<const std::vector<PersonSnapshot>> history;
};

/// Every snapshot of one frame, for detectors that reason across people.
struct SnapshotSetMsg {
  double t{0.0};
  std::int64_t frame{0};
  std::shared_ptr<const std::vector<PersonSnapshot>> snapshots;
};

struct ApproachInfo {
  PersonId person_id{0};
  PersonType person_type{PersonType::Customer};
  Vec3 pos3d;
  double distance_m{0.0};
  double t{0.0};
};

struct PickInfo {
  PersonId person_id{0};
  ItemId item_id{0};
  double t{0.0};
};

struct LeaveInfo {
  PersonId person_id{0};
  Vec3 pos3d;
  double distance_m{0.0};
  double t{0.0};
  LeaveCause cause{LeaveCause::Departed};
};

struct FFormationGroup {
  PersonId group_id{0};
  std::vector<PersonId> member_ids;  // sorted, at least two
  GroupType group_type{GroupType::LShape};
  double t{0.0};

  friend bool operator==(const FFormationGroup&, const FFormationGroup&) = default;
};

struct InteractInfo {
  double t{0.0};
  std::vector<FFormationGroup> groups;
};

/// Published by the state layer whenever a person's machine changes.
struct StateUpdate {
  PersonId person_id{0};
  int epoch{1};
  BehaviorState state{BehaviorState::Idle};
  double t{0.0};
};

using Payload = std::variant<FrameMsg, SnapshotMsg, SnapshotSetMsg, ApproachInfo, PickInfo, LeaveInfo,
                             InteractInfo, StateUpdate>;

namespace topics {
inline constexpr const char* kCamera = "camera";
inline constexpr const char* kSnapshots = "snapshots";
inline constexpr const char* kSnapshotSets = "snapshot_sets";
inline constexpr const char* kApproachInfo = "approach_info";
inline constexpr const char* kPickInfo = "pick_info";
inline constexpr const char* kLeaveInfo = "leave_info";
inline constexpr const char* kInteractInfo = "interact_info";
inline constexpr const char* kStateUpdates = "state_updates";

// Layer ranks: sensor < base < advanced < state.
inline constexpr int kSensorRank = 0;
inline constexpr int kBaseRank = 1;
inline constexpr int kAdvancedRank = 2;
inline constexpr int kStateRank = 3;
}  // namespace topics

}  // namespace storesense

#endif  // STORESENSE_MESSAGES_HPP
