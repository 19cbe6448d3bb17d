#ifndef STORESENSE_ANALYTICS_HPP
#define STORESENSE_ANALYTICS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "storesense/trace_io.hpp"

namespace storesense {

/// Null, integer, real, text or flag.
using Cell = std::variant<std::monostate, std::int64_t, double, std::string, bool>;

struct ReportTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  /// Header line plus one line per row. Nulls are written as `null`.
  std::string to_csv() const;

  friend bool operator==(const ReportTable&, const ReportTable&) = default;
};

std::string cell_text(const Cell& c);

/// First and last trace timestamps, when a trace is available.
struct TraceSpan {
  double t_first{0.0};
  double t_last{0.0};
};

/// Per hour: customer A and P entries, total and in-group. The hour range is
/// the trace span when given, else the span of the logs.
ReportTable hourly_state_counts(const std::vector<TransitionLogEntry>& log, const std::vector<GroupLogEntry>& groups,
                                const PipelineConfig& cfg, std::optional<TraceSpan> span = std::nullopt);

struct DurationReport {
  ReportTable table;
  /// Intervals still open at the end and closed at the last timestamp.
  std::uint64_t closed_open_intervals{0};
};

/// Seconds spent in A (entry to the epoch's Leave) and in P (each entry to the
/// next) per customer and hour, split by whether the person was in a group.
DurationReport person_state_durations(const std::vector<TransitionLogEntry>& log,
                                      const std::vector<GroupLogEntry>& groups, const PipelineConfig& cfg,
                                      std::optional<TraceSpan> span = std::nullopt);

/// Customer A entries and P entries (A->P and P->P) per hour.
ReportTable person_state_counts(const std::vector<TransitionLogEntry>& log, const PipelineConfig& cfg);

/// Ground position of every transition entry with its group flag.
ReportTable position_export(const std::vector<TransitionLogEntry>& log, const std::vector<GroupLogEntry>& groups,
                            const PipelineConfig& cfg);
ReportTable zone_rectangle(const ItemZone& zone);

ReportTable group_type_distribution(const std::vector<GroupLogEntry>& groups);

/// Seconds per group type per person. People in `log` who never grouped get
/// a zero row.
ReportTable group_time_per_person(const std::vector<GroupLogEntry>& groups, const PipelineConfig& cfg,
                                  const std::vector<TransitionLogEntry>& log = {});
/// group_time_per_person restricted to customers with at least one A or P entry.
ReportTable state_and_group_time(const std::vector<TransitionLogEntry>& log, const std::vector<GroupLogEntry>& groups,
                                 const PipelineConfig& cfg);
/// Customers' seconds in groups that also contain staff.
ReportTable customer_staff_time(const std::vector<GroupLogEntry>& groups, const PipelineConfig& cfg);

/// Every report keyed by its file name.
std::map<std::string, ReportTable> all_reports(const std::vector<TransitionLogEntry>& log,
                                               const std::vector<GroupLogEntry>& groups, const PipelineConfig& cfg,
                                               const std::optional<ItemZone>& zone = std::nullopt,
                                               std::optional<TraceSpan> span = std::nullopt);

// --- evaluation ---------------------------------------------------------------------

struct EvalMetrics {
  std::int64_t tp{0};
  std::int64_t fp{0};
  std::int64_t fn{0};
  std::optional<double> precision;  // null when tp + fp == 0
  std::optional<double> recall;     // null when tp + fn == 0

  static EvalMetrics from_counts(std::int64_t tp, std::int64_t fp, std::int64_t fn);
  friend bool operator==(const EvalMetrics&, const EvalMetrics&) = default;
};

struct StateEvaluation {
  EvalMetrics approach;
  EvalMetrics pick;
  EvalMetrics leave;

  const EvalMetrics& get(BehaviorState s) const;
};

/// Greedy chronological matching: predictions in time order each take the
/// closest unmatched truth event of the same person and state within t_match.
StateEvaluation evaluate_states(const std::vector<TransitionLogEntry>& predicted,
                                const std::vector<GroundTruthEvent>& truth, const PipelineConfig& cfg);

struct GroupEvaluation {
  EvalMetrics metrics;
  std::int64_t type_matches{0};
  std::optional<double> type_accuracy;  // null without true positives
};

/// Per group tick, one-to-one matching by best member-set Jaccard (>= 0.5).
GroupEvaluation evaluate_groups(const std::vector<GroupLogEntry>& predicted,
                                const std::vector<GroundTruthGroup>& truth, const PipelineConfig& cfg);

double jaccard(std::span<const PersonId> a, std::span<const PersonId> b);

std::string metrics_to_json_text(const StateEvaluation& states, const GroupEvaluation& groups);

}  // namespace storesense

#endif  // STORESENSE_ANALYTICS_HPP
