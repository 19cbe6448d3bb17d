#include "storesense/pipeline.hpp"

#include <fmt/core.h>

#include "storesense/attribute_nodes.hpp"
#include "storesense/detectors.hpp"

namespace storesense {

PipelineResult run_pipeline(const Trace& trace, const PipelineConfig& cfg, const ItemZone& zone,
                            const RunOptions& options) {
  validate_config(cfg);

  MessageBus bus;
  bus.create_topic(topics::kCamera, topics::kSensorRank);
  bus.create_topic(topics::kSnapshots, topics::kBaseRank);
  bus.create_topic(topics::kSnapshotSets, topics::kBaseRank);
  bus.create_topic(topics::kApproachInfo, topics::kAdvancedRank);
  bus.create_topic(topics::kPickInfo, topics::kAdvancedRank);
  bus.create_topic(topics::kLeaveInfo, topics::kAdvancedRank);
  bus.create_topic(topics::kInteractInfo, topics::kAdvancedRank);
  bus.create_topic(topics::kStateUpdates, topics::kStateRank);

  BaseLayerNode base(cfg);
  ApproachNode approach(zone, cfg);
  PickNode pick(zone, cfg);
  LeaveNode leave(zone, cfg);
  InteractNode interact(cfg);
  UnifiedLogNode unified(zone, cfg);

  Scheduler scheduler(bus);
  scheduler.add_node(base);
  scheduler.add_node(approach);
  scheduler.add_node(pick);
  scheduler.add_node(leave);
  scheduler.add_node(interact);
  scheduler.add_node(unified);

  CompletionReport report = scheduler.run(trace, options.mode, options.record_transcript);

  PipelineResult result;
  result.transitions = unified.log().transitions();
  result.groups = unified.log().groups();
  result.transcript_hash = report.transcript_hash;
  result.transcript = std::move(report.transcript);

  RunCounters& c = result.counters;
  c.frames = report.frames;
  for (const auto& f : trace) c.observations += f.observations.size();
  c.deliveries = report.deliveries;
  c.published = report.published;
  c.dropped_messages = report.dropped;
  const StateCounters& sc = unified.log().counters();
  c.rejected_events = sc.rejected_events;
  c.absence_leaves = sc.absence_leaves;
  c.reincarnations = sc.reincarnations;
  c.dropped_group_members = sc.dropped_group_members;
  return result;
}

std::string config_hash(const PipelineConfig& cfg) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : config_to_json_text(cfg)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace storesense
