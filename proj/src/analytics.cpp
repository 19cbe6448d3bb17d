#include "storesense/analytics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <tuple>

#include <fmt/core.h>

#include "json.hpp"

namespace storesense {

namespace {

constexpr double kEps = 1e-9;

bool is_customer(const TransitionLogEntry& e) { return e.person_type == PersonType::Customer; }

std::size_t type_slot(GroupType g) { return static_cast<std::size_t>(g); }

// Times of the group ticks each person took part in, sorted.
std::map<PersonId, std::vector<double>> membership(const std::vector<GroupLogEntry>& groups) {
  std::map<PersonId, std::vector<double>> out;
  for (const auto& g : groups) {
    for (PersonId p : g.member_ids) out[p].push_back(g.t);
  }
  for (auto& [id, ts] : out) std::sort(ts.begin(), ts.end());
  return out;
}

bool in_group_at(const std::map<PersonId, std::vector<double>>& m, PersonId p, double t, double window) {
  auto it = m.find(p);
  if (it == m.end()) return false;
  auto lo = std::lower_bound(it->second.begin(), it->second.end(), t - window - kEps);
  return lo != it->second.end() && *lo <= t + window + kEps;
}

// Closed coverage intervals [tick - w, tick + w], merged.
std::vector<std::pair<double, double>> coverage(const std::vector<double>& ticks, double window) {
  std::vector<std::pair<double, double>> out;
  for (double t : ticks) {
    const double a = t - window;
    const double b = t + window;
    if (!out.empty() && a <= out.back().second) out.back().second = std::max(out.back().second, b);
    else out.emplace_back(a, b);
  }
  return out;
}

double overlap(double a0, double a1, double b0, double b1) { return std::max(0.0, std::min(a1, b1) - std::max(a0, b0)); }

std::optional<std::pair<double, double>> log_span(const std::vector<TransitionLogEntry>& log,
                                                  const std::vector<GroupLogEntry>& groups) {
  std::optional<std::pair<double, double>> span;
  auto extend = [&](double t) {
    if (!span) span.emplace(t, t);
    span->first = std::min(span->first, t);
    span->second = std::max(span->second, t);
  };
  for (const auto& e : log) extend(e.t);
  for (const auto& g : groups) extend(g.t);
  return span;
}

std::map<PersonId, PersonType> person_types(const std::vector<GroupLogEntry>& groups,
                                            const std::vector<TransitionLogEntry>& log) {
  std::map<PersonId, PersonType> out;
  for (const auto& g : groups) {
    for (std::size_t i = 0; i < g.member_ids.size(); ++i) {
      if (i < g.member_types.size()) out.emplace(g.member_ids[i], g.member_types[i]);
    }
  }
  for (const auto& e : log) out.emplace(e.person_id, e.person_type);
  return out;
}

const std::vector<std::string> kGroupTimeColumns{"person", "person_type", "LShape", "SideBySide",
                                                 "VisVis", "Circular",    "total"};

ReportTable group_time_table(const std::map<PersonId, std::array<std::int64_t, 4>>& ticks,
                             const std::map<PersonId, PersonType>& types, const PipelineConfig& cfg) {
  ReportTable t;
  t.columns = kGroupTimeColumns;
  for (const auto& [id, counts] : ticks) {
    std::vector<Cell> row{Cell{id}, Cell{std::string(to_string(types.at(id)))}};
    double total = 0.0;
    for (std::int64_t c : counts) {
      const double s = static_cast<double>(c) * cfg.group_tick;
      row.emplace_back(s);
      total += s;
    }
    row.emplace_back(total);
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace

std::string cell_text(const Cell& c) {
  struct Visitor {
    std::string operator()(std::monostate) const { return "null"; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_real(v); }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
    std::string operator()(const std::string& v) const {
      if (v.find_first_of(",\"\n") == std::string::npos) return v;
      std::string q = "\"";
      for (char ch : v) {
        if (ch == '"') q += '"';
        q += ch;
      }
      return q + "\"";
    }
  };
  return std::visit(Visitor{}, c);
}

std::string ReportTable::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out += ',';
    out += columns[i];
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += cell_text(row[i]);
    }
    out += '\n';
  }
  return out;
}

ReportTable hourly_state_counts(const std::vector<TransitionLogEntry>& log, const std::vector<GroupLogEntry>& groups,
                                const PipelineConfig& cfg, std::optional<TraceSpan> span) {
  ReportTable table;
  table.columns = {"hour", "a_total", "a_in_group", "p_total", "p_in_group"};
  const WallClock clock(cfg.clock_origin);
  std::optional<std::pair<double, double>> range;
  if (span) range.emplace(span->t_first, span->t_last);
  else range = log_span(log, groups);
  if (!range) return table;

  const auto members = membership(groups);
  std::map<std::int64_t, std::array<std::int64_t, 4>> counts;
  for (std::int64_t h = clock.hour_index(range->first); h <= clock.hour_index(range->second); ++h) counts[h] = {};
  for (const auto& e : log) {
    if (!is_customer(e)) continue;
    if (e.state != BehaviorState::Approach && e.state != BehaviorState::Pick) continue;
    const std::size_t base = e.state == BehaviorState::Approach ? 0 : 2;
    auto& c = counts[clock.hour_index(e.t)];
    ++c[base];
    if (in_group_at(members, e.person_id, e.t, cfg.group_join_window)) ++c[base + 1];
  }
  for (const auto& [h, c] : counts) {
    table.rows.push_back({Cell{std::int64_t{WallClock::hour_of_day_from_index(h)}}, Cell{c[0]}, Cell{c[1]},
                          Cell{c[2]}, Cell{c[3]}});
  }
  return table;
}

DurationReport person_state_durations(const std::vector<TransitionLogEntry>& log,
                                      const std::vector<GroupLogEntry>& groups, const PipelineConfig& cfg,
                                      std::optional<TraceSpan> span) {
  DurationReport report;
  report.table.columns = {"person", "hour", "in_group", "a_seconds", "p_seconds"};
  const WallClock clock(cfg.clock_origin);
  double end = 0.0;
  if (span) end = span->t_last;
  else if (auto r = log_span(log, groups)) end = r->second;

  const auto members = membership(groups);
  std::map<PersonId, std::vector<std::pair<double, double>>> cover;
  for (const auto& [id, ticks] : members) cover[id] = coverage(ticks, cfg.group_join_window);

  // (person, hour index, in_group) -> {A seconds, P seconds}
  std::map<std::tuple<PersonId, std::int64_t, bool>, std::array<double, 2>> acc;
  auto add = [&](PersonId p, double a, double b, int slot) {
    static const std::vector<std::pair<double, double>> kNone;
    auto cit = cover.find(p);
    const auto& cv = cit == cover.end() ? kNone : cit->second;
    double cursor = a;
    while (cursor < b) {
      std::int64_t h = clock.hour_index(cursor);
      while (clock.hour_start(h + 1) <= cursor) ++h;
      const double piece_end = std::min(b, clock.hour_start(h + 1));
      double inside = 0.0;
      for (const auto& [c0, c1] : cv) inside += overlap(cursor, piece_end, c0, c1);
      const double outside = (piece_end - cursor) - inside;
      if (inside > 0) acc[{p, h, true}][slot] += inside;
      if (outside > 0) acc[{p, h, false}][slot] += outside;
      cursor = piece_end;
    }
  };

  std::map<std::pair<PersonId, int>, std::vector<const TransitionLogEntry*>> epochs;
  for (const auto& e : log) {
    if (is_customer(e)) epochs[{e.person_id, e.epoch}].push_back(&e);
  }
  for (auto& [key, entries] : epochs) {
    std::sort(entries.begin(), entries.end(),
              [](const auto* a, const auto* b) { return a->row_id < b->row_id; });
    std::optional<double> a_start;
    std::optional<double> a_end;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& e = *entries[i];
      if (e.state == BehaviorState::Approach) a_start = e.t;
      if (e.state == BehaviorState::Leave) a_end = e.t;
      if (e.state == BehaviorState::Pick) {
        double stop = end;
        if (i + 1 < entries.size()) stop = entries[i + 1]->t;
        else ++report.closed_open_intervals;
        add(key.first, e.t, std::max(e.t, stop), 1);
      }
    }
    if (a_start) {
      if (!a_end) ++report.closed_open_intervals;
      const double stop = a_end.value_or(end);
      add(key.first, *a_start, std::max(*a_start, stop), 0);
    }
  }
  for (const auto& [key, secs] : acc) {
    const auto& [p, h, grouped] = key;
    report.table.rows.push_back({Cell{p}, Cell{std::int64_t{WallClock::hour_of_day_from_index(h)}}, Cell{grouped},
                                 Cell{secs[0]}, Cell{secs[1]}});
  }
  return report;
}

ReportTable person_state_counts(const std::vector<TransitionLogEntry>& log, const PipelineConfig& cfg) {
  ReportTable table;
  table.columns = {"person", "hour", "a_count", "p_count"};
  const WallClock clock(cfg.clock_origin);
  std::map<std::pair<PersonId, std::int64_t>, std::array<std::int64_t, 2>> counts;
  for (const auto& e : log) {
    if (!is_customer(e)) continue;
    if (e.state == BehaviorState::Approach) ++counts[{e.person_id, clock.hour_index(e.t)}][0];
    else if (e.state == BehaviorState::Pick) ++counts[{e.person_id, clock.hour_index(e.t)}][1];
  }
  for (const auto& [key, c] : counts) {
    table.rows.push_back(
        {Cell{key.first}, Cell{std::int64_t{WallClock::hour_of_day_from_index(key.second)}}, Cell{c[0]}, Cell{c[1]}});
  }
  return table;
}

ReportTable position_export(const std::vector<TransitionLogEntry>& log, const std::vector<GroupLogEntry>& groups,
                            const PipelineConfig& cfg) {
  ReportTable table;
  table.columns = {"row_id", "person", "person_type", "prev_state", "state", "x", "z", "in_group"};
  const auto members = membership(groups);
  for (const auto& e : log) {
    table.rows.push_back({Cell{e.row_id}, Cell{e.person_id}, Cell{std::string(to_string(e.person_type))},
                          Cell{std::string(to_string(e.prev_state))}, Cell{std::string(to_string(e.state))},
                          Cell{e.pos.x}, Cell{e.pos.z},
                          Cell{in_group_at(members, e.person_id, e.t, cfg.group_join_window)}});
  }
  return table;
}

ReportTable zone_rectangle(const ItemZone& zone) {
  ReportTable table;
  table.columns = {"zone_id", "x_min", "z_min", "x_max", "z_max"};
  table.rows.push_back({Cell{std::int64_t{zone.zone_id}}, Cell{zone.center3d.x - zone.half_extent},
                        Cell{zone.center3d.z - zone.half_extent}, Cell{zone.center3d.x + zone.half_extent},
                        Cell{zone.center3d.z + zone.half_extent}});
  return table;
}

ReportTable group_type_distribution(const std::vector<GroupLogEntry>& groups) {
  ReportTable table;
  table.columns = {"group_type", "ticks", "percent"};
  std::array<std::int64_t, 4> counts{};
  for (const auto& g : groups) ++counts[type_slot(g.group_type)];
  const auto total = static_cast<double>(groups.size());
  for (GroupType g : kAllGroupTypes) {
    const std::int64_t c = counts[type_slot(g)];
    Cell pct;
    if (!groups.empty()) pct = 100.0 * static_cast<double>(c) / total;
    table.rows.push_back({Cell{std::string(to_string(g))}, Cell{c}, pct});
  }
  return table;
}

ReportTable group_time_per_person(const std::vector<GroupLogEntry>& groups, const PipelineConfig& cfg,
                                  const std::vector<TransitionLogEntry>& log) {
  std::map<PersonId, std::array<std::int64_t, 4>> ticks;
  for (const auto& e : log) ticks[e.person_id];
  for (const auto& g : groups) {
    for (PersonId p : g.member_ids) ++ticks[p][type_slot(g.group_type)];
  }
  return group_time_table(ticks, person_types(groups, log), cfg);
}

ReportTable state_and_group_time(const std::vector<TransitionLogEntry>& log, const std::vector<GroupLogEntry>& groups,
                                 const PipelineConfig& cfg) {
  std::set<PersonId> active;
  for (const auto& e : log) {
    if (is_customer(e) && (e.state == BehaviorState::Approach || e.state == BehaviorState::Pick)) {
      active.insert(e.person_id);
    }
  }
  std::map<PersonId, std::array<std::int64_t, 4>> ticks;
  for (PersonId p : active) ticks[p];
  for (const auto& g : groups) {
    for (PersonId p : g.member_ids) {
      if (active.count(p)) ++ticks[p][type_slot(g.group_type)];
    }
  }
  return group_time_table(ticks, person_types(groups, log), cfg);
}

ReportTable customer_staff_time(const std::vector<GroupLogEntry>& groups, const PipelineConfig& cfg) {
  std::map<PersonId, std::array<std::int64_t, 4>> ticks;
  for (const auto& g : groups) {
    const bool has_customer =
        std::find(g.member_types.begin(), g.member_types.end(), PersonType::Customer) != g.member_types.end();
    const bool has_staff =
        std::find(g.member_types.begin(), g.member_types.end(), PersonType::Staff) != g.member_types.end();
    if (!has_customer || !has_staff) continue;
    for (std::size_t i = 0; i < g.member_ids.size() && i < g.member_types.size(); ++i) {
      if (g.member_types[i] == PersonType::Customer) ++ticks[g.member_ids[i]][type_slot(g.group_type)];
    }
  }
  return group_time_table(ticks, person_types(groups, {}), cfg);
}

std::map<std::string, ReportTable> all_reports(const std::vector<TransitionLogEntry>& log,
                                               const std::vector<GroupLogEntry>& groups, const PipelineConfig& cfg,
                                               const std::optional<ItemZone>& zone, std::optional<TraceSpan> span) {
  std::map<std::string, ReportTable> out;
  out["hourly_counts.csv"] = hourly_state_counts(log, groups, cfg, span);
  out["person_durations.csv"] = person_state_durations(log, groups, cfg, span).table;
  out["person_counts.csv"] = person_state_counts(log, cfg);
  out["positions.csv"] = position_export(log, groups, cfg);
  out["group_distribution.csv"] = group_type_distribution(groups);
  out["group_time.csv"] = group_time_per_person(groups, cfg, log);
  out["state_group_time.csv"] = state_and_group_time(log, groups, cfg);
  out["customer_staff_time.csv"] = customer_staff_time(groups, cfg);
  if (zone) out["zone.csv"] = zone_rectangle(*zone);
  return out;
}

// --- evaluation -----------------------------------------------------------------------

EvalMetrics EvalMetrics::from_counts(std::int64_t tp, std::int64_t fp, std::int64_t fn) {
  EvalMetrics m{tp, fp, fn, std::nullopt, std::nullopt};
  if (tp + fp > 0) m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return m;
}

const EvalMetrics& StateEvaluation::get(BehaviorState s) const {
  switch (s) {
    case BehaviorState::Approach: return approach;
    case BehaviorState::Pick: return pick;
    default: return leave;
  }
}

StateEvaluation evaluate_states(const std::vector<TransitionLogEntry>& predicted,
                                const std::vector<GroundTruthEvent>& truth, const PipelineConfig& cfg) {
  std::vector<const TransitionLogEntry*> preds;
  for (const auto& e : predicted) {
    if (e.state != BehaviorState::Idle) preds.push_back(&e);
  }
  std::stable_sort(preds.begin(), preds.end(), [](const auto* a, const auto* b) {
    return std::tie(a->t, a->row_id) < std::tie(b->t, b->row_id);
  });
  std::vector<bool> taken(truth.size(), false);
  std::array<std::int64_t, 4> tp{}, fp{}, fn{};
  for (const auto* p : preds) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const auto& g = truth[i];
      if (taken[i] || g.person_id != p->person_id || g.event != p->state) continue;
      const double d = std::abs(g.t - p->t);
      if (d > cfg.t_match + kEps) continue;
      if (!best) {
        best = i;
        continue;
      }
      const double bd = std::abs(truth[*best].t - p->t);
      if (d < bd || (d == bd && g.t < truth[*best].t)) best = i;
    }
    const auto slot = static_cast<std::size_t>(p->state);
    if (best) {
      taken[*best] = true;
      ++tp[slot];
    } else {
      ++fp[slot];
    }
  }
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!taken[i]) ++fn[static_cast<std::size_t>(truth[i].event)];
  }
  auto metric = [&](BehaviorState s) {
    const auto k = static_cast<std::size_t>(s);
    return EvalMetrics::from_counts(tp[k], fp[k], fn[k]);
  };
  return {metric(BehaviorState::Approach), metric(BehaviorState::Pick), metric(BehaviorState::Leave)};
}

double jaccard(std::span<const PersonId> a, std::span<const PersonId> b) {
  std::set<PersonId> sa(a.begin(), a.end());
  std::set<PersonId> sb(b.begin(), b.end());
  std::size_t common = 0;
  for (PersonId p : sa) common += sb.count(p);
  const std::size_t uni = sa.size() + sb.size() - common;
  return uni == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(uni);
}

GroupEvaluation evaluate_groups(const std::vector<GroupLogEntry>& predicted,
                                const std::vector<GroundTruthGroup>& truth, const PipelineConfig& cfg) {
  struct TickGroups {
    std::vector<const GroupLogEntry*> pred;
    std::vector<const GroundTruthGroup*> truth;
  };
  std::map<std::int64_t, TickGroups> ticks;
  for (const auto& g : predicted) ticks[std::llround(g.t / cfg.group_tick)].pred.push_back(&g);
  for (const auto& g : truth) {
    auto k = static_cast<std::int64_t>(std::ceil(g.t_start / cfg.group_tick - kEps));
    for (; static_cast<double>(k) * cfg.group_tick < g.t_end - kEps; ++k) ticks[k].truth.push_back(&g);
  }

  std::int64_t tp = 0, fp = 0, fn = 0, type_ok = 0;
  for (const auto& [k, tg] : ticks) {
    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < tg.pred.size(); ++i) {
      for (std::size_t j = 0; j < tg.truth.size(); ++j) {
        const double jac = jaccard(tg.pred[i]->member_ids, tg.truth[j]->member_ids);
        if (jac >= 0.5) pairs.emplace_back(-jac, i, j);
      }
    }
    std::sort(pairs.begin(), pairs.end());
    std::vector<bool> pred_used(tg.pred.size(), false);
    std::vector<bool> truth_used(tg.truth.size(), false);
    std::int64_t matched = 0;
    for (const auto& [neg, i, j] : pairs) {
      if (pred_used[i] || truth_used[j]) continue;
      pred_used[i] = truth_used[j] = true;
      ++matched;
      if (tg.pred[i]->group_type == tg.truth[j]->group_type) ++type_ok;
    }
    tp += matched;
    fp += static_cast<std::int64_t>(tg.pred.size()) - matched;
    fn += static_cast<std::int64_t>(tg.truth.size()) - matched;
  }
  GroupEvaluation out;
  out.metrics = EvalMetrics::from_counts(tp, fp, fn);
  out.type_matches = type_ok;
  if (tp > 0) out.type_accuracy = static_cast<double>(type_ok) / static_cast<double>(tp);
  return out;
}

std::string metrics_to_json_text(const StateEvaluation& states, const GroupEvaluation& groups) {
  using nlohmann::ordered_json;
  auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
  auto metric = [&](const EvalMetrics& m) {
    ordered_json j;
    j["tp"] = m.tp;
    j["fp"] = m.fp;
    j["fn"] = m.fn;
    j["precision"] = opt(m.precision);
    j["recall"] = opt(m.recall);
    return j;
  };
  ordered_json j;
  j["states"]["A"] = metric(states.approach);
  j["states"]["P"] = metric(states.pick);
  j["states"]["L"] = metric(states.leave);
  j["groups"] = metric(groups.metrics);
  j["groups"]["type_matches"] = groups.type_matches;
  j["groups"]["type_accuracy"] = opt(groups.type_accuracy);
  return j.dump(2) + "\n";
}

}  // namespace storesense
