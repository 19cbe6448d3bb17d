#include "storesense/state_layer.hpp"

#include <fmt/core.h>

#include "storesense/error.hpp"

namespace storesense {

PersonId StateEvent::person_id() const {
  return std::visit([](const auto& i) { return i.person_id; }, info);
}

std::optional<TransitionLogEntry> apply_event(PersonMachine& machine, const StateEvent& event,
                                              const ItemZone& zone) {
  if (event.person_id() != machine.person_id) {
    throw StateError(fmt::format("event for person {} applied to machine of person {}", event.person_id(),
                                 machine.person_id));
  }
  BehaviorState next = BehaviorState::Idle;
  Vec3 pos = machine.last_pos;
  std::optional<ItemId> item;
  if (const auto* a = std::get_if<ApproachInfo>(&event.info)) {
    next = BehaviorState::Approach;
    pos = a->pos3d;
  } else if (const auto* p = std::get_if<PickInfo>(&event.info)) {
    next = BehaviorState::Pick;
    item = p->item_id;
  } else {
    next = BehaviorState::Leave;
    pos = std::get<LeaveInfo>(event.info).pos3d;
  }
  if (!is_legal_transition(machine.state, next)) return std::nullopt;

  TransitionLogEntry e;
  e.person_id = machine.person_id;
  e.epoch = machine.epoch;
  e.prev_state = machine.state;
  e.state = next;
  e.distance_m = ground_distance(pos, zone);
  e.pos = pos;
  e.t = event.t;
  e.person_type = machine.person_type;

  machine.state = next;
  machine.state_entered_at = event.t;
  if (item) machine.last_item = item;
  return e;
}

std::vector<TransitionLogEntry> absence_sweep(std::map<PersonId, PersonMachine>& machines, double now,
                                              const ItemZone& zone, const PipelineConfig& cfg) {
  std::vector<TransitionLogEntry> out;
  for (auto& [id, m] : machines) {
    if (m.retired() || now - m.last_seen <= cfg.t_absent) continue;
    const StateEvent ev{LeaveInfo{id, m.last_pos, ground_distance(m.last_pos, zone), now, LeaveCause::Absent}, now};
    if (auto e = apply_event(m, ev, zone)) out.push_back(std::move(*e));
  }
  return out;
}

PersonMachine reincarnate(const PersonMachine& previous, double t) {
  if (!previous.retired()) {
    throw StateError(fmt::format("person {} epoch {} is still live", previous.person_id, previous.epoch));
  }
  PersonMachine m;
  m.person_id = previous.person_id;
  m.epoch = previous.epoch + 1;
  m.state = BehaviorState::Idle;
  m.state_entered_at = t;
  m.last_seen = t;
  m.person_type = previous.person_type;
  m.last_pos = previous.last_pos;
  return m;
}

GroupRecord record_groups(const InteractInfo& info, const std::map<PersonId, PersonMachine>& machines) {
  GroupRecord rec;
  for (const auto& g : info.groups) {
    GroupLogEntry e;
    e.t = info.t;
    e.group_type = g.group_type;
    for (PersonId id : g.member_ids) {
      auto it = machines.find(id);
      if (it == machines.end()) {
        ++rec.dropped_members;
        continue;
      }
      e.member_ids.push_back(id);
      e.member_types.push_back(it->second.person_type);
    }
    if (e.member_ids.size() < 2) continue;
    e.group_id = e.member_ids.front();
    rec.entries.push_back(std::move(e));
  }
  return rec;
}

// --- unified log ------------------------------------------------------------------

UnifiedLog::UnifiedLog(const ItemZone& zone, const PipelineConfig& cfg)
    : zone_(zone), cfg_(cfg), clock_(cfg.clock_origin) {}

void UnifiedLog::stamp(TransitionLogEntry& e) {
  e.row_id = next_row_++;
  e.datetime_text = clock_.table_datetime(e.t);
}

std::optional<StateUpdate> UnifiedLog::observe(const PersonSnapshot& s) {
  auto [it, created] = machines_.try_emplace(s.person_id);
  PersonMachine& m = it->second;
  std::optional<StateUpdate> update;
  if (created) {
    m.person_id = s.person_id;
    m.state_entered_at = s.t;
  } else if (m.retired() && ground_distance(s.pos3d, zone_) < cfg_.leave_distance) {
    m = reincarnate(m, s.t);
    ++counters_.reincarnations;
    update = StateUpdate{m.person_id, m.epoch, m.state, s.t};
  }
  m.last_seen = s.t;
  m.last_pos = s.pos3d;
  m.person_type = s.person_type;
  return update;
}

std::vector<StateUpdate> UnifiedLog::sweep(double now) {
  std::vector<StateUpdate> updates;
  for (auto& e : absence_sweep(machines_, now, zone_, cfg_)) {
    stamp(e);
    ++counters_.absence_leaves;
    updates.push_back(StateUpdate{e.person_id, e.epoch, e.state, now});
    transitions_.push_back(std::move(e));
  }
  return updates;
}

std::optional<StateUpdate> UnifiedLog::apply(const StateEvent& event) {
  auto it = machines_.find(event.person_id());
  if (it == machines_.end()) throw StateError(fmt::format("unknown person {}", event.person_id()));
  auto entry = apply_event(it->second, event, zone_);
  if (!entry) {
    ++counters_.rejected_events;
    return std::nullopt;
  }
  stamp(*entry);
  StateUpdate u{entry->person_id, entry->epoch, entry->state, entry->t};
  transitions_.push_back(std::move(*entry));
  return u;
}

void UnifiedLog::record(const InteractInfo& info) {
  auto rec = record_groups(info, machines_);
  counters_.dropped_group_members += static_cast<std::uint64_t>(rec.dropped_members);
  for (auto& e : rec.entries) groups_.push_back(std::move(e));
}

std::vector<std::string> UnifiedLogNode::subscriptions() const {
  return {topics::kCamera,   topics::kSnapshots, topics::kApproachInfo, topics::kPickInfo,
          topics::kLeaveInfo, topics::kInteractInfo};
}

void UnifiedLogNode::on_message(const Envelope& env, Outbox& out) {
  const Payload& p = *env.payload;
  if (std::holds_alternative<FrameMsg>(p)) {
    for (auto& u : log_.sweep(env.t)) out.publish(topics::kStateUpdates, u);
  } else if (const auto* s = std::get_if<SnapshotMsg>(&p)) {
    if (auto u = log_.observe(s->snapshot)) out.publish(topics::kStateUpdates, *u);
  } else if (const auto* a = std::get_if<ApproachInfo>(&p)) {
    if (auto u = log_.apply(StateEvent{*a, env.t})) out.publish(topics::kStateUpdates, *u);
  } else if (const auto* k = std::get_if<PickInfo>(&p)) {
    if (auto u = log_.apply(StateEvent{*k, env.t})) out.publish(topics::kStateUpdates, *u);
  } else if (const auto* l = std::get_if<LeaveInfo>(&p)) {
    if (auto u = log_.apply(StateEvent{*l, env.t})) out.publish(topics::kStateUpdates, *u);
  } else if (const auto* i = std::get_if<InteractInfo>(&p)) {
    log_.record(*i);
  }
}

std::map<std::pair<PersonId, int>, BehaviorState> replay_states(const std::vector<TransitionLogEntry>& log) {
  std::map<std::pair<PersonId, int>, BehaviorState> states;
  for (const auto& e : log) {
    auto [it, created] = states.try_emplace({e.person_id, e.epoch}, BehaviorState::Idle);
    if (it->second != e.prev_state || !is_legal_transition(e.prev_state, e.state)) {
      throw StateError(fmt::format("row {} does not follow from the replayed state", e.row_id));
    }
    it->second = e.state;
  }
  return states;
}

}  // namespace storesense
