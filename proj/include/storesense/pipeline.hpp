#ifndef STORESENSE_PIPELINE_HPP
#define STORESENSE_PIPELINE_HPP

#include <string>
#include <vector>

#include "storesense/message_bus.hpp"
#include "storesense/state_layer.hpp"

namespace storesense {

inline constexpr const char* kVersion = "1.0.0";

struct RunOptions {
  ExecutionMode mode{ExecutionMode::Deterministic};
  bool record_transcript{false};
};

struct RunCounters {
  std::uint64_t frames{0};
  std::uint64_t observations{0};
  std::uint64_t deliveries{0};
  std::uint64_t published{0};
  std::uint64_t dropped_messages{0};
  std::uint64_t rejected_events{0};
  std::uint64_t absence_leaves{0};
  std::uint64_t reincarnations{0};
  std::uint64_t dropped_group_members{0};
};

struct PipelineResult {
  std::vector<TransitionLogEntry> transitions;
  std::vector<GroupLogEntry> groups;
  RunCounters counters;
  std::uint64_t transcript_hash{0};
  std::vector<std::string> transcript;
};

/// Wires camera -> base layer -> {approach, pick, leave, interact} -> unified
/// log over a fresh bus and replays `trace` through it.
PipelineResult run_pipeline(const Trace& trace, const PipelineConfig& cfg, const ItemZone& zone,
                            const RunOptions& options = {});

/// Stable 64-bit digest of a config (hex), for manifests.
std::string config_hash(const PipelineConfig& cfg);

}  // namespace storesense

#endif  // STORESENSE_PIPELINE_HPP
