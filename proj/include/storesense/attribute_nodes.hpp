#ifndef STORESENSE_ATTRIBUTE_NODES_HPP
#define STORESENSE_ATTRIBUTE_NODES_HPP

#include <deque>
#include <map>
#include <vector>

#include "storesense/message_bus.hpp"

namespace storesense {

/// Base-layer stand-in for the perception models: turns trace frames into
/// per-person snapshots and keeps each person's bounded history.
class BaseLayer {
 public:
  explicit BaseLayer(const PipelineConfig& cfg) : capacity_(static_cast<std::size_t>(history_capacity(cfg))) {}

  /// One SnapshotMsg per observation, in observation order.
  std::vector<SnapshotMsg> step(const TraceFrame& frame);

  std::size_t capacity() const { return capacity_; }
  const std::deque<PersonSnapshot>* history(PersonId id) const;
  std::optional<double> last_seen(PersonId id) const;

 private:
  std::size_t capacity_;
  std::map<PersonId, std::deque<PersonSnapshot>> history_;
  std::map<PersonId, double> last_seen_;
};

class BaseLayerNode : public Node {
 public:
  explicit BaseLayerNode(const PipelineConfig& cfg) : layer_(cfg) {}

  std::string name() const override { return "base_layer"; }
  std::vector<std::string> subscriptions() const override { return {topics::kCamera}; }
  void on_message(const Envelope& env, Outbox& out) override;

 private:
  BaseLayer layer_;
};

/// Picking verdict for one snapshot: the upstream flag when present,
/// otherwise either wrist within pick_radius of the zone center.
bool is_picking(const PersonSnapshot& s, const ItemZone& zone, const PipelineConfig& cfg);

}  // namespace storesense

#endif  // STORESENSE_ATTRIBUTE_NODES_HPP
