#ifndef STORESENSE_DETECTORS_HPP
#define STORESENSE_DETECTORS_HPP

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "storesense/message_bus.hpp"

namespace storesense {

// --- personal behavior ----------------------------------------------------------

/// Approach rule over the newest `window_frames` snapshots (oldest first in
/// `history`). Only fires from Idle, and only once the history is full.
std::optional<ApproachInfo> approach_step(std::span<const PersonSnapshot> history, BehaviorState state,
                                          const ItemZone& zone, const PipelineConfig& cfg);

/// Mirror of the approach rule with inverted predicates over `leave_window`
/// snapshots: far in 3D and outside the item area in 2D.
std::optional<LeaveInfo> leave_step(std::span<const PersonSnapshot> history, BehaviorState state,
                                    const ItemZone& zone, const PipelineConfig& cfg);

/// Consecutive picking streak and the item votes collected during it.
struct PickCounters {
  int streak{0};
  std::vector<ItemId> votes;

  void reset() {
    streak = 0;
    votes.clear();
  }
};

/// Most frequent vote; ties go to the smallest item id. Requires non-empty votes.
ItemId vote_mode(std::span<const ItemId> votes);

/// Advances one person's pick counters with their newest snapshot. Emits when
/// both the streak and the vote count reach their thresholds, then resets.
std::optional<PickInfo> pick_step(const PersonSnapshot& snapshot, BehaviorState state, PickCounters& counters,
                                  const ItemZone& zone, const PipelineConfig& cfg);

// --- F-formations -----------------------------------------------------------------

/// o-space proximity: close enough on the ground and the points one stride
/// ahead of each person's facing nearly coincide.
bool pairwise_interacting(const PersonSnapshot& a, const PersonSnapshot& b, const PipelineConfig& cfg);

/// Connected components (size >= 2) of the pairwise-interaction graph. Each
/// component is sorted; components are ordered by their smallest id.
std::vector<std::vector<PersonId>> detect_groups(std::span<const PersonSnapshot> snapshots,
                                                 const PipelineConfig& cfg);

GroupType classify_effort_angle(double delta, const PipelineConfig& cfg);
GroupType classify_group(std::span<const PersonSnapshot> members, const PipelineConfig& cfg);

InteractInfo interact_step(std::span<const PersonSnapshot> snapshots, double t, const PipelineConfig& cfg);

// --- nodes ----------------------------------------------------------------------

/// Each detector keeps a private copy of every person's state, fed by the
/// state layer's updates.
class StateMirror {
 public:
  BehaviorState get(PersonId id) const {
    auto it = states_.find(id);
    return it == states_.end() ? BehaviorState::Idle : it->second;
  }
  void set(PersonId id, BehaviorState s) { states_[id] = s; }

 private:
  std::map<PersonId, BehaviorState> states_;
};

class ApproachNode : public Node {
 public:
  ApproachNode(const ItemZone& zone, const PipelineConfig& cfg) : zone_(zone), cfg_(cfg) {}
  std::string name() const override { return "approach"; }
  std::vector<std::string> subscriptions() const override { return {topics::kSnapshots, topics::kStateUpdates}; }
  void on_message(const Envelope& env, Outbox& out) override;

 private:
  ItemZone zone_;
  PipelineConfig cfg_;
  StateMirror states_;
};

class PickNode : public Node {
 public:
  PickNode(const ItemZone& zone, const PipelineConfig& cfg) : zone_(zone), cfg_(cfg) {}
  std::string name() const override { return "pick"; }
  std::vector<std::string> subscriptions() const override { return {topics::kSnapshots, topics::kStateUpdates}; }
  void on_message(const Envelope& env, Outbox& out) override;

 private:
  ItemZone zone_;
  PipelineConfig cfg_;
  StateMirror states_;
  std::map<PersonId, PickCounters> counters_;
};

class LeaveNode : public Node {
 public:
  LeaveNode(const ItemZone& zone, const PipelineConfig& cfg) : zone_(zone), cfg_(cfg) {}
  std::string name() const override { return "leave"; }
  std::vector<std::string> subscriptions() const override { return {topics::kSnapshots, topics::kStateUpdates}; }
  void on_message(const Envelope& env, Outbox& out) override;

 private:
  ItemZone zone_;
  PipelineConfig cfg_;
  StateMirror states_;
};

/// Runs group detection on the first frame of every group tick and stamps the
/// result with the tick time.
class InteractNode : public Node {
 public:
  explicit InteractNode(const PipelineConfig& cfg) : cfg_(cfg) {}
  std::string name() const override { return "interact"; }
  std::vector<std::string> subscriptions() const override { return {topics::kSnapshotSets}; }
  void on_message(const Envelope& env, Outbox& out) override;

 private:
  PipelineConfig cfg_;
  std::optional<std::int64_t> last_tick_;
};

/// Index of the group tick that contains time t.
std::int64_t group_tick_index(double t, double group_tick);

}  // namespace storesense

#endif  // STORESENSE_DETECTORS_HPP
