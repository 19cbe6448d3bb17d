#ifndef STORESENSE_TRACE_IO_HPP
#define STORESENSE_TRACE_IO_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "storesense/core.hpp"

namespace storesense {

struct TraceFrame {
  double t{0.0};
  std::int64_t frame{0};
  std::vector<Observation> observations;

  friend bool operator==(const TraceFrame&, const TraceFrame&) = default;
};

using Trace = std::vector<TraceFrame>;

struct GroundTruthEvent {
  double t{0.0};
  PersonId person_id{0};
  BehaviorState event{BehaviorState::Approach};  // A, P or L
  std::optional<ItemId> item_id;

  friend bool operator==(const GroundTruthEvent&, const GroundTruthEvent&) = default;
};

struct GroundTruthGroup {
  double t_start{0.0};
  double t_end{0.0};
  std::vector<PersonId> member_ids;  // sorted
  GroupType group_type{GroupType::LShape};

  friend bool operator==(const GroundTruthGroup&, const GroundTruthGroup&) = default;
};

struct GroundTruth {
  std::vector<GroundTruthEvent> events;
  std::vector<GroundTruthGroup> groups;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

/// One row of the state-transition log.
struct TransitionLogEntry {
  std::int64_t row_id{0};
  PersonId person_id{0};
  int epoch{1};
  BehaviorState prev_state{BehaviorState::Idle};
  BehaviorState state{BehaviorState::Approach};
  double distance_m{0.0};
  std::string datetime_text;
  Vec3 pos;
  double t{0.0};
  PersonType person_type{PersonType::Customer};

  friend bool operator==(const TransitionLogEntry&, const TransitionLogEntry&) = default;
};

struct GroupLogEntry {
  double t{0.0};
  PersonId group_id{0};
  GroupType group_type{GroupType::LShape};
  std::vector<PersonId> member_ids;       // sorted
  std::vector<PersonType> member_types;   // parallel to member_ids

  friend bool operator==(const GroupLogEntry&, const GroupLogEntry&) = default;
};

/// The six legal (prev, next) pairs of the behavior state machine.
bool is_legal_transition(BehaviorState prev, BehaviorState next);

// Traces and ground truth are JSON Lines, one frame / record per line.
Trace read_trace(std::istream& in);
Trace read_trace_file(const std::string& path);
void write_trace(std::ostream& out, const Trace& frames);
void write_trace_file(const std::string& path, const Trace& frames);

GroundTruth read_ground_truth(std::istream& in);
GroundTruth read_ground_truth_file(const std::string& path);
void write_ground_truth(std::ostream& out, const GroundTruth& gt);
void write_ground_truth_file(const std::string& path, const GroundTruth& gt);

/// Table view: the exact published column set plus Epoch, one decimal for
/// distance and coordinates. Lossy, write-only.
void write_transition_table(std::ostream& out, const std::vector<TransitionLogEntry>& entries);
/// Machine view: table columns plus T and PersonType, full precision. Round-trips.
void write_transition_log(std::ostream& out, const std::vector<TransitionLogEntry>& entries);
std::vector<TransitionLogEntry> read_transition_log(std::istream& in);

void write_group_log(std::ostream& out, const std::vector<GroupLogEntry>& entries);
std::vector<GroupLogEntry> read_group_log(std::istream& in);

inline constexpr const char* kTransitionTableHeader =
    "RowID,PersonID,Prev_State,State,Distance(m),Date time,X,Y,Z,Epoch";
inline constexpr const char* kTransitionLogHeader =
    "RowID,PersonID,Prev_State,State,Distance(m),Date time,X,Y,Z,Epoch,T,PersonType";
inline constexpr const char* kGroupLogHeader = "T,GroupID,GroupType,Members,MemberTypes";

/// Shortest round-tripping decimal text of a double.
std::string format_real(double v);

/// Writes `content` to `path`, throwing IoError on failure.
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace storesense

#endif  // STORESENSE_TRACE_IO_HPP
