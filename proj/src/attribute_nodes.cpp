#include "storesense/attribute_nodes.hpp"

#include <cmath>

namespace storesense {

namespace {

double distance3(const Vec3& a, const Vec3& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

}  // namespace

std::vector<SnapshotMsg> BaseLayer::step(const TraceFrame& frame) {
  std::vector<SnapshotMsg> out;
  out.reserve(frame.observations.size());
  for (const auto& obs : frame.observations) {
    auto& hist = history_[obs.person_id];
    hist.push_back(obs);
    while (hist.size() > capacity_) hist.pop_front();
    last_seen_[obs.person_id] = obs.t;
    out.push_back(SnapshotMsg{obs, std::make_shared<const std::vector<PersonSnapshot>>(hist.begin(), hist.end())});
  }
  return out;
}

const std::deque<PersonSnapshot>* BaseLayer::history(PersonId id) const {
  auto it = history_.find(id);
  return it == history_.end() ? nullptr : &it->second;
}

std::optional<double> BaseLayer::last_seen(PersonId id) const {
  auto it = last_seen_.find(id);
  if (it == last_seen_.end()) return std::nullopt;
  return it->second;
}

void BaseLayerNode::on_message(const Envelope& env, Outbox& out) {
  const TraceFrame& frame = *env.as<FrameMsg>().frame;
  auto all = std::make_shared<std::vector<PersonSnapshot>>();
  for (auto& msg : layer_.step(frame)) {
    all->push_back(msg.snapshot);
    out.publish(topics::kSnapshots, std::move(msg));
  }
  out.publish(topics::kSnapshotSets, SnapshotSetMsg{frame.t, frame.frame, std::move(all)});
}

bool is_picking(const PersonSnapshot& s, const ItemZone& zone, const PipelineConfig& cfg) {
  if (s.picking_flag) return *s.picking_flag;
  if (!s.arms) return false;
  auto near = [&](const std::optional<Vec3>& wrist) {
    return wrist && distance3(*wrist, zone.center3d) <= cfg.pick_radius;
  };
  return near(s.arms->left_wrist) || near(s.arms->right_wrist);
}

}  // namespace storesense
