#include "storesense/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "storesense/attribute_nodes.hpp"

namespace storesense {

namespace {

std::span<const PersonSnapshot> newest(std::span<const PersonSnapshot> history, int n) {
  return history.subspan(history.size() - static_cast<std::size_t>(n));
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

GroundVec ospace_point(const PersonSnapshot& s, double stride) {
  const GroundVec f = facing_vector(s.head);
  return {s.pos3d.x + stride * f.x, s.pos3d.z + stride * f.z};
}

}  // namespace

std::optional<ApproachInfo> approach_step(std::span<const PersonSnapshot> history, BehaviorState state,
                                          const ItemZone& zone, const PipelineConfig& cfg) {
  if (state != BehaviorState::Idle) return std::nullopt;
  if (history.size() < static_cast<std::size_t>(cfg.window_frames)) return std::nullopt;
  int near_3d = 0;
  int overlap_2d = 0;
  for (const auto& h : newest(history, cfg.window_frames)) {
    if (ground_distance(h.pos3d, zone) <= cfg.approach_distance) ++near_3d;
    if (bbox_overlaps(h.bbox, zone.rect2d)) ++overlap_2d;
  }
  if (near_3d < cfg.approach_3d_count || overlap_2d < cfg.approach_2d_count) return std::nullopt;
  const PersonSnapshot& now = history.back();
  return ApproachInfo{now.person_id, now.person_type, now.pos3d, ground_distance(now.pos3d, zone), now.t};
}

std::optional<LeaveInfo> leave_step(std::span<const PersonSnapshot> history, BehaviorState state,
                                    const ItemZone& zone, const PipelineConfig& cfg) {
  if (state == BehaviorState::Leave) return std::nullopt;
  if (history.size() < static_cast<std::size_t>(cfg.leave_window)) return std::nullopt;
  int far_3d = 0;
  int outside_2d = 0;
  for (const auto& h : newest(history, cfg.leave_window)) {
    if (ground_distance(h.pos3d, zone) >= cfg.leave_distance) ++far_3d;
    if (!bbox_overlaps(h.bbox, zone.rect2d)) ++outside_2d;
  }
  if (far_3d < cfg.leave_3d_count || outside_2d < cfg.leave_2d_count) return std::nullopt;
  const PersonSnapshot& now = history.back();
  return LeaveInfo{now.person_id, now.pos3d, ground_distance(now.pos3d, zone), now.t, LeaveCause::Departed};
}

ItemId vote_mode(std::span<const ItemId> votes) {
  std::map<ItemId, int> counts;
  for (ItemId v : votes) ++counts[v];
  ItemId best = counts.begin()->first;
  int best_count = 0;
  for (const auto& [item, n] : counts) {
    if (n > best_count) {
      best = item;
      best_count = n;
    }
  }
  return best;
}

std::optional<PickInfo> pick_step(const PersonSnapshot& snapshot, BehaviorState state, PickCounters& counters,
                                  const ItemZone& zone, const PipelineConfig& cfg) {
  if (state != BehaviorState::Approach && state != BehaviorState::Pick) return std::nullopt;
  if (is_picking(snapshot, zone, cfg)) {
    ++counters.streak;
    if (snapshot.held_item) counters.votes.push_back(*snapshot.held_item);
  } else {
    counters.reset();
  }
  if (counters.streak < cfg.pick_streak || counters.votes.size() < static_cast<std::size_t>(cfg.pick_votes)) {
    return std::nullopt;
  }
  PickInfo info{snapshot.person_id, vote_mode(counters.votes), snapshot.t};
  counters.reset();
  return info;
}

bool pairwise_interacting(const PersonSnapshot& a, const PersonSnapshot& b, const PipelineConfig& cfg) {
  if (ground_distance(a.pos3d, b.pos3d) > cfg.d_pair) return false;
  const GroundVec ca = ospace_point(a, cfg.stride_r);
  const GroundVec cb = ospace_point(b, cfg.stride_r);
  return std::hypot(ca.x - cb.x, ca.z - cb.z) <= cfg.eps_o;
}

std::vector<std::vector<PersonId>> detect_groups(std::span<const PersonSnapshot> snapshots,
                                                 const PipelineConfig& cfg) {
  const std::size_t n = snapshots.size();
  DisjointSets sets(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (pairwise_interacting(snapshots[i], snapshots[j], cfg)) sets.unite(i, j);
    }
  }
  std::map<std::size_t, std::vector<PersonId>> components;
  for (std::size_t i = 0; i < n; ++i) components[sets.find(i)].push_back(snapshots[i].person_id);

  std::vector<std::vector<PersonId>> groups;
  for (auto& [root, members] : components) {
    if (members.size() < 2) continue;
    std::sort(members.begin(), members.end());
    groups.push_back(std::move(members));
  }
  std::sort(groups.begin(), groups.end());
  return groups;
}

GroupType classify_effort_angle(double delta, const PipelineConfig& cfg) {
  if (delta < cfg.group_angle_low) return GroupType::SideBySide;
  if (delta > cfg.group_angle_high) return GroupType::VisVis;
  return GroupType::LShape;
}

GroupType classify_group(std::span<const PersonSnapshot> members, const PipelineConfig& cfg) {
  if (members.size() > 2) return GroupType::Circular;
  const double delta = effort_angle(facing_vector(members[0].head), facing_vector(members[1].head));
  return classify_effort_angle(delta, cfg);
}

InteractInfo interact_step(std::span<const PersonSnapshot> snapshots, double t, const PipelineConfig& cfg) {
  InteractInfo info{t, {}};
  for (auto& members : detect_groups(snapshots, cfg)) {
    std::vector<PersonSnapshot> chosen;
    for (PersonId id : members) {
      auto it = std::find_if(snapshots.begin(), snapshots.end(),
                             [id](const PersonSnapshot& s) { return s.person_id == id; });
      chosen.push_back(*it);
    }
    const PersonId group_id = members.front();
    info.groups.push_back(FFormationGroup{group_id, std::move(members), classify_group(chosen, cfg), t});
  }
  return info;
}

std::int64_t group_tick_index(double t, double group_tick) {
  return static_cast<std::int64_t>(std::floor(t / group_tick + 1e-9));
}

// --- nodes ----------------------------------------------------------------------

void ApproachNode::on_message(const Envelope& env, Outbox& out) {
  if (const auto* u = std::get_if<StateUpdate>(env.payload.get())) {
    states_.set(u->person_id, u->state);
    return;
  }
  const auto& msg = env.as<SnapshotMsg>();
  if (auto info = approach_step(*msg.history, states_.get(msg.snapshot.person_id), zone_, cfg_)) {
    out.publish(topics::kApproachInfo, *info);
  }
}

void PickNode::on_message(const Envelope& env, Outbox& out) {
  if (const auto* u = std::get_if<StateUpdate>(env.payload.get())) {
    states_.set(u->person_id, u->state);
    if (u->state != BehaviorState::Approach && u->state != BehaviorState::Pick) counters_.erase(u->person_id);
    return;
  }
  const auto& msg = env.as<SnapshotMsg>();
  const PersonId id = msg.snapshot.person_id;
  if (auto info = pick_step(msg.snapshot, states_.get(id), counters_[id], zone_, cfg_)) {
    out.publish(topics::kPickInfo, *info);
  }
}

void LeaveNode::on_message(const Envelope& env, Outbox& out) {
  if (const auto* u = std::get_if<StateUpdate>(env.payload.get())) {
    states_.set(u->person_id, u->state);
    return;
  }
  const auto& msg = env.as<SnapshotMsg>();
  if (auto info = leave_step(*msg.history, states_.get(msg.snapshot.person_id), zone_, cfg_)) {
    out.publish(topics::kLeaveInfo, *info);
  }
}

void InteractNode::on_message(const Envelope& env, Outbox& out) {
  const auto& msg = env.as<SnapshotSetMsg>();
  const std::int64_t tick = group_tick_index(msg.t, cfg_.group_tick);
  if (last_tick_ && tick <= *last_tick_) return;
  last_tick_ = tick;
  out.publish(topics::kInteractInfo,
              interact_step(*msg.snapshots, static_cast<double>(tick) * cfg_.group_tick, cfg_));
}

}  // namespace storesense
