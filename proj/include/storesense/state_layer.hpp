#ifndef STORESENSE_STATE_LAYER_HPP
#define STORESENSE_STATE_LAYER_HPP

#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "storesense/message_bus.hpp"

namespace storesense {

/// One person's behavior state machine for one epoch (an Idle-to-Leave life).
/// Leave is terminal; a returning person gets a fresh machine with the next epoch.
struct PersonMachine {
  PersonId person_id{0};
  int epoch{1};
  BehaviorState state{BehaviorState::Idle};
  double state_entered_at{0.0};
  double last_seen{0.0};
  std::optional<ItemId> last_item;
  PersonType person_type{PersonType::Customer};
  Vec3 last_pos;

  bool retired() const { return state == BehaviorState::Leave; }
};

struct StateEvent {
  std::variant<ApproachInfo, PickInfo, LeaveInfo> info;
  double t{0.0};

  PersonId person_id() const;
};

/// Validates and applies one detector verdict. Returns the log entry (row id
/// and date text left for the caller to stamp), or nothing when the
/// transition is illegal from the machine's state, in which case the machine
/// is untouched. Throws StateError if the event is for another person.
std::optional<TransitionLogEntry> apply_event(PersonMachine& machine, const StateEvent& event,
                                              const ItemZone& zone);

/// Forces Leave on every live machine unseen for longer than t_absent.
std::vector<TransitionLogEntry> absence_sweep(std::map<PersonId, PersonMachine>& machines, double now,
                                              const ItemZone& zone, const PipelineConfig& cfg);

/// Fresh Idle machine for the next epoch. Throws StateError if `previous` is live.
PersonMachine reincarnate(const PersonMachine& previous, double t);

struct GroupRecord {
  std::vector<GroupLogEntry> entries;
  int dropped_members{0};
};

/// Joins each group with its members' person types. Unknown members are
/// dropped; groups left with fewer than two members are dropped too.
GroupRecord record_groups(const InteractInfo& info, const std::map<PersonId, PersonMachine>& machines);

struct StateCounters {
  std::uint64_t rejected_events{0};
  std::uint64_t absence_leaves{0};
  std::uint64_t reincarnations{0};
  std::uint64_t dropped_group_members{0};
};

/// Single owner of every machine and of both logs.
class UnifiedLog {
 public:
  UnifiedLog(const ItemZone& zone, const PipelineConfig& cfg);

  /// Tracks presence and position. A retired person seen back inside the
  /// leave radius starts a new epoch; the returned update announces it.
  std::optional<StateUpdate> observe(const PersonSnapshot& s);
  std::vector<StateUpdate> sweep(double now);
  /// Throws StateError for a person never observed.
  std::optional<StateUpdate> apply(const StateEvent& event);
  void record(const InteractInfo& info);

  const std::vector<TransitionLogEntry>& transitions() const { return transitions_; }
  const std::vector<GroupLogEntry>& groups() const { return groups_; }
  const std::map<PersonId, PersonMachine>& machines() const { return machines_; }
  const StateCounters& counters() const { return counters_; }

 private:
  void stamp(TransitionLogEntry& e);

  ItemZone zone_;
  PipelineConfig cfg_;
  WallClock clock_;
  std::map<PersonId, PersonMachine> machines_;
  std::vector<TransitionLogEntry> transitions_;
  std::vector<GroupLogEntry> groups_;
  std::int64_t next_row_{1};
  StateCounters counters_;
};

class UnifiedLogNode : public Node {
 public:
  UnifiedLogNode(const ItemZone& zone, const PipelineConfig& cfg) : log_(zone, cfg) {}

  std::string name() const override { return "unified_log"; }
  std::vector<std::string> subscriptions() const override;
  void on_message(const Envelope& env, Outbox& out) override;

  const UnifiedLog& log() const { return log_; }

 private:
  UnifiedLog log_;
};

/// Replays a transition log into the final state of every (person, epoch).
std::map<std::pair<PersonId, int>, BehaviorState> replay_states(const std::vector<TransitionLogEntry>& log);

}  // namespace storesense

#endif  // STORESENSE_STATE_LAYER_HPP
