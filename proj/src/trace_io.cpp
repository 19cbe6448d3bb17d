#include "storesense/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/core.h>

#include "json.hpp"
#include "storesense/error.hpp"

namespace storesense {

using nlohmann::json;
using nlohmann::ordered_json;

bool is_legal_transition(BehaviorState prev, BehaviorState next) {
  using S = BehaviorState;
  switch (next) {
    case S::Approach: return prev == S::Idle;
    case S::Pick: return prev == S::Approach || prev == S::Pick;
    case S::Leave: return prev == S::Idle || prev == S::Approach || prev == S::Pick;
    case S::Idle: return false;
  }
  return false;
}

std::string format_real(double v) { return fmt::format("{}", v); }

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path));
  out << content;
  if (!out) throw IoError(fmt::format("write to '{}' failed", path));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

namespace {

// --- JSON record helpers -----------------------------------------------------

class LineReader {
 public:
  explicit LineReader(std::size_t line) : line_(line) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(fmt::format("line {}: {}", line_, what));
  }

  const json& field(const json& obj, const char* key) const {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) fail(fmt::format("missing field {}", key));
    return *it;
  }

  double real(const json& v, const char* key) const {
    if (!v.is_number()) fail(fmt::format("field {} must be a number", key));
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(fmt::format("field {} must be finite", key));
    return d;
  }

  std::int64_t integer(const json& v, const char* key) const {
    if (!v.is_number_integer()) fail(fmt::format("field {} must be an integer", key));
    return v.get<std::int64_t>();
  }

  std::vector<double> reals(const json& v, const char* key, std::size_t n) const {
    if (!v.is_array() || v.size() != n) fail(fmt::format("field {} must hold {} numbers", key, n));
    std::vector<double> out;
    for (const auto& e : v) out.push_back(real(e, key));
    return out;
  }

  Vec3 vec3(const json& v, const char* key) const {
    const auto r = reals(v, key, 3);
    return {r[0], r[1], r[2]};
  }

  std::string text(const json& v, const char* key) const {
    if (!v.is_string()) fail(fmt::format("field {} must be a string", key));
    return v.get<std::string>();
  }

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

json parse_line(const std::string& text, std::size_t line) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    throw ParseError(fmt::format("line {}: malformed JSON record", line));
  }
}

ordered_json vec3_json(const Vec3& v) { return ordered_json::array({v.x, v.y, v.z}); }

ordered_json optional_vec3_json(const std::optional<Vec3>& v) {
  return v ? vec3_json(*v) : ordered_json(nullptr);
}

ordered_json observation_json(const Observation& o) {
  ordered_json j;
  j["person_id"] = o.person_id;
  j["person_type"] = std::string(to_string(o.person_type));
  j["bbox"] = ordered_json::array({o.bbox.x, o.bbox.y, o.bbox.w, o.bbox.h});
  j["pos3d"] = vec3_json(o.pos3d);
  j["head"] = ordered_json::array({o.head.yaw, o.head.pitch, o.head.roll});
  if (o.arms) {
    ordered_json a;
    a["left_wrist"] = optional_vec3_json(o.arms->left_wrist);
    a["right_wrist"] = optional_vec3_json(o.arms->right_wrist);
    a["left_elbow"] = optional_vec3_json(o.arms->left_elbow);
    a["right_elbow"] = optional_vec3_json(o.arms->right_elbow);
    j["arms"] = std::move(a);
  }
  if (o.picking_flag) j["picking_flag"] = *o.picking_flag;
  if (o.held_item) j["held_item"] = *o.held_item;
  return j;
}

Observation parse_observation(const json& j, const LineReader& r, double t, std::int64_t frame) {
  if (!j.is_object()) r.fail("observation must be an object");
  Observation o;
  o.t = t;
  o.frame = frame;
  o.person_id = r.integer(r.field(j, "person_id"), "person_id");
  if (o.person_id < 0) r.fail("person_id must be >= 0");
  try {
    o.person_type = person_type_from_string(r.text(r.field(j, "person_type"), "person_type"));
  } catch (const ParseError& e) {
    r.fail(e.what());
  }
  const auto b = r.reals(r.field(j, "bbox"), "bbox", 4);
  o.bbox = {b[0], b[1], b[2], b[3]};
  if (!(o.bbox.w > 0 && o.bbox.h > 0)) r.fail("bbox width and height must be positive");
  o.pos3d = r.vec3(r.field(j, "pos3d"), "pos3d");
  const auto h = r.reals(r.field(j, "head"), "head", 3);
  o.head = {h[0], h[1], h[2]};
  constexpr double pi = std::numbers::pi;
  if (std::abs(o.head.yaw) > pi || std::abs(o.head.pitch) > pi / 2 || std::abs(o.head.roll) > pi / 2) {
    r.fail("head pose out of range");
  }
  if (auto it = j.find("arms"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) r.fail("field arms must be an object");
    ArmKeypoints arms;
    auto keypoint = [&](const char* key, std::optional<Vec3>& out) {
      auto k = it->find(key);
      if (k != it->end() && !k->is_null()) out = r.vec3(*k, key);
    };
    keypoint("left_wrist", arms.left_wrist);
    keypoint("right_wrist", arms.right_wrist);
    keypoint("left_elbow", arms.left_elbow);
    keypoint("right_elbow", arms.right_elbow);
    o.arms = arms;
  }
  if (auto it = j.find("picking_flag"); it != j.end() && !it->is_null()) {
    if (!it->is_boolean()) r.fail("field picking_flag must be a boolean");
    o.picking_flag = it->get<bool>();
  }
  if (auto it = j.find("held_item"); it != j.end() && !it->is_null()) {
    o.held_item = r.integer(*it, "held_item");
  }
  return o;
}

template <typename Fn>
void for_each_line(std::istream& in, Fn&& fn) {
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    fn(text, line);
  }
}

// --- CSV helpers -------------------------------------------------------------

std::vector<std::string> split_csv(const std::string& line, std::size_t lineno) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  if (quoted) throw ParseError(fmt::format("line {}: unterminated quote", lineno));
  cells.push_back(std::move(cell));
  return cells;
}

std::string quote_csv(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  return out + "\"";
}

double parse_real(const std::string& s, std::size_t line) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(fmt::format("line {}: '{}' is not a number", line, s));
  }
  return v;
}

std::int64_t parse_int(const std::string& s, std::size_t line) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(fmt::format("line {}: '{}' is not an integer", line, s));
  }
  return v;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ';') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!s.empty()) out.push_back(cur);
  return out;
}

template <typename Fn>
void for_each_csv_row(std::istream& in, const char* header, Fn&& fn) {
  std::string text;
  std::size_t line = 0;
  bool seen_header = false;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (!seen_header) {
      if (text != header) throw ParseError(fmt::format("line 1: expected header '{}'", header));
      seen_header = true;
      continue;
    }
    if (text.empty()) continue;
    fn(split_csv(text, line), line);
  }
  if (!seen_header) throw ParseError("missing CSV header");
}

void check_legal(const TransitionLogEntry& e) {
  if (!is_legal_transition(e.prev_state, e.state)) {
    throw StateError(fmt::format("refusing to log illegal transition {}->{} for person {}",
                                 to_string(e.prev_state), to_string(e.state), e.person_id));
  }
}

}  // namespace

// --- traces ---------------------------------------------------------------------

Trace read_trace(std::istream& in) {
  Trace frames;
  for_each_line(in, [&](const std::string& text, std::size_t line) {
    const LineReader r(line);
    const json j = parse_line(text, line);
    if (!j.is_object()) r.fail("frame record must be an object");
    TraceFrame f;
    f.t = r.real(r.field(j, "t"), "t");
    if (f.t < 0) r.fail("t must be >= 0");
    f.frame = r.integer(r.field(j, "frame"), "frame");
    if (!frames.empty() && f.frame <= frames.back().frame) {
      throw ParseError(fmt::format("non-monotone frame at line {}", line));
    }
    const json& obs = r.field(j, "observations");
    if (!obs.is_array()) r.fail("field observations must be an array");
    std::set<PersonId> seen;
    for (const auto& o : obs) {
      f.observations.push_back(parse_observation(o, r, f.t, f.frame));
      if (!seen.insert(f.observations.back().person_id).second) {
        r.fail(fmt::format("duplicate person_id {} in frame {}", f.observations.back().person_id, f.frame));
      }
    }
    frames.push_back(std::move(f));
  });
  return frames;
}

Trace read_trace_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open trace '{}'", path));
  return read_trace(in);
}

void write_trace(std::ostream& out, const Trace& frames) {
  for (const auto& f : frames) {
    ordered_json j;
    j["t"] = f.t;
    j["frame"] = f.frame;
    j["observations"] = ordered_json::array();
    for (const auto& o : f.observations) j["observations"].push_back(observation_json(o));
    out << j.dump() << '\n';
  }
}

void write_trace_file(const std::string& path, const Trace& frames) {
  std::ostringstream s;
  write_trace(s, frames);
  write_text_file(path, s.str());
}

// --- ground truth -----------------------------------------------------------------

GroundTruth read_ground_truth(std::istream& in) {
  GroundTruth gt;
  for_each_line(in, [&](const std::string& text, std::size_t line) {
    const LineReader r(line);
    const json j = parse_line(text, line);
    if (!j.is_object()) r.fail("record must be an object");
    const std::string kind = r.text(r.field(j, "kind"), "kind");
    if (kind == "event") {
      GroundTruthEvent e;
      e.t = r.real(r.field(j, "t"), "t");
      e.person_id = r.integer(r.field(j, "person_id"), "person_id");
      const std::string ev = r.text(r.field(j, "event"), "event");
      if (ev != "A" && ev != "P" && ev != "L") r.fail(fmt::format("unknown event '{}'", ev));
      e.event = state_from_string(ev);
      if (auto it = j.find("item_id"); it != j.end() && !it->is_null()) e.item_id = r.integer(*it, "item_id");
      if (e.event == BehaviorState::Pick && !e.item_id) r.fail("pick event requires item_id");
      gt.events.push_back(e);
    } else if (kind == "group") {
      GroundTruthGroup g;
      g.t_start = r.real(r.field(j, "t_start"), "t_start");
      g.t_end = r.real(r.field(j, "t_end"), "t_end");
      if (!(g.t_start < g.t_end)) r.fail("t_start < t_end violated");
      const json& members = r.field(j, "members");
      if (!members.is_array()) r.fail("field members must be an array");
      for (const auto& m : members) g.member_ids.push_back(r.integer(m, "members"));
      if (g.member_ids.size() < 2) r.fail("a group needs at least 2 members");
      try {
        g.group_type = group_type_from_string(r.text(r.field(j, "type"), "type"));
      } catch (const ParseError& e) {
        r.fail(e.what());
      }
      if ((g.group_type == GroupType::Circular) != (g.member_ids.size() > 2)) {
        r.fail("Circular iff more than two members");
      }
      gt.groups.push_back(std::move(g));
    } else {
      r.fail(fmt::format("unknown record kind '{}'", kind));
    }
  });
  return gt;
}

GroundTruth read_ground_truth_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open ground truth '{}'", path));
  return read_ground_truth(in);
}

void write_ground_truth(std::ostream& out, const GroundTruth& gt) {
  for (const auto& e : gt.events) {
    ordered_json j;
    j["kind"] = "event";
    j["t"] = e.t;
    j["person_id"] = e.person_id;
    j["event"] = std::string(to_string(e.event));
    if (e.item_id) j["item_id"] = *e.item_id;
    out << j.dump() << '\n';
  }
  for (const auto& g : gt.groups) {
    ordered_json j;
    j["kind"] = "group";
    j["t_start"] = g.t_start;
    j["t_end"] = g.t_end;
    j["members"] = g.member_ids;
    j["type"] = std::string(to_string(g.group_type));
    out << j.dump() << '\n';
  }
}

void write_ground_truth_file(const std::string& path, const GroundTruth& gt) {
  std::ostringstream s;
  write_ground_truth(s, gt);
  write_text_file(path, s.str());
}

// --- transition log ---------------------------------------------------------------

void write_transition_table(std::ostream& out, const std::vector<TransitionLogEntry>& entries) {
  out << kTransitionTableHeader << '\n';
  for (const auto& e : entries) {
    check_legal(e);
    out << fmt::format("{},{},{},{},{:.1f},{},{:.1f},{:.1f},{:.1f},{}\n", e.row_id, e.person_id,
                       to_string(e.prev_state), to_string(e.state), e.distance_m,
                       quote_csv(e.datetime_text), e.pos.x, e.pos.y, e.pos.z, e.epoch);
  }
}

void write_transition_log(std::ostream& out, const std::vector<TransitionLogEntry>& entries) {
  out << kTransitionLogHeader << '\n';
  for (const auto& e : entries) {
    check_legal(e);
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", e.row_id, e.person_id,
                       to_string(e.prev_state), to_string(e.state), format_real(e.distance_m),
                       quote_csv(e.datetime_text), format_real(e.pos.x), format_real(e.pos.y),
                       format_real(e.pos.z), e.epoch, format_real(e.t), to_string(e.person_type));
  }
}

std::vector<TransitionLogEntry> read_transition_log(std::istream& in) {
  std::vector<TransitionLogEntry> entries;
  for_each_csv_row(in, kTransitionLogHeader, [&](const std::vector<std::string>& c, std::size_t line) {
    if (c.size() != 12) throw ParseError(fmt::format("line {}: expected 12 columns", line));
    TransitionLogEntry e;
    e.row_id = parse_int(c[0], line);
    e.person_id = parse_int(c[1], line);
    try {
      e.prev_state = state_from_string(c[2]);
      e.state = state_from_string(c[3]);
      e.person_type = person_type_from_string(c[11]);
    } catch (const ParseError& err) {
      throw ParseError(fmt::format("line {}: {}", line, err.what()));
    }
    e.distance_m = parse_real(c[4], line);
    e.datetime_text = c[5];
    e.pos = {parse_real(c[6], line), parse_real(c[7], line), parse_real(c[8], line)};
    e.epoch = static_cast<int>(parse_int(c[9], line));
    e.t = parse_real(c[10], line);
    if (!is_legal_transition(e.prev_state, e.state)) {
      throw ParseError(fmt::format("line {}: illegal transition", line));
    }
    if (!entries.empty() && e.row_id <= entries.back().row_id) {
      throw ParseError(fmt::format("line {}: row ids must increase", line));
    }
    entries.push_back(std::move(e));
  });
  return entries;
}

// --- group log --------------------------------------------------------------------

void write_group_log(std::ostream& out, const std::vector<GroupLogEntry>& entries) {
  out << kGroupLogHeader << '\n';
  for (const auto& g : entries) {
    std::string members;
    std::string types;
    for (std::size_t i = 0; i < g.member_ids.size(); ++i) {
      if (i) {
        members += ';';
        types += ';';
      }
      members += std::to_string(g.member_ids[i]);
      types += to_string(g.member_types.at(i));
    }
    out << fmt::format("{},{},{},{},{}\n", format_real(g.t), g.group_id, to_string(g.group_type),
                       members, types);
  }
}

std::vector<GroupLogEntry> read_group_log(std::istream& in) {
  std::vector<GroupLogEntry> entries;
  for_each_csv_row(in, kGroupLogHeader, [&](const std::vector<std::string>& c, std::size_t line) {
    if (c.size() != 5) throw ParseError(fmt::format("line {}: expected 5 columns", line));
    GroupLogEntry g;
    g.t = parse_real(c[0], line);
    g.group_id = parse_int(c[1], line);
    try {
      g.group_type = group_type_from_string(c[2]);
      for (const auto& m : split_list(c[3])) g.member_ids.push_back(parse_int(m, line));
      for (const auto& m : split_list(c[4])) g.member_types.push_back(person_type_from_string(m));
    } catch (const ParseError& err) {
      throw ParseError(fmt::format("line {}: {}", line, err.what()));
    }
    if (g.member_ids.size() < 2 || g.member_ids.size() != g.member_types.size()) {
      throw ParseError(fmt::format("line {}: malformed member list", line));
    }
    entries.push_back(std::move(g));
  });
  return entries;
}

}  // namespace storesense
