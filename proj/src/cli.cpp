#include "storesense/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <sstream>
#include <ostream>
#include <string>

#include <fmt/core.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "storesense/analytics.hpp"
#include "storesense/error.hpp"
#include "storesense/pipeline.hpp"
#include "storesense/simulator.hpp"

namespace storesense {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

enum class Verbosity { Quiet, Info, Debug };

Verbosity verbosity() {
  const char* v = std::getenv("STORESENSE_LOG");
  if (!v) return Verbosity::Quiet;
  const std::string s(v);
  if (s == "debug") return Verbosity::Debug;
  if (s == "info") return Verbosity::Info;
  return Verbosity::Quiet;
}

struct Options {
  std::string config;
  std::string trace;
  std::string gt;
  std::string scenario;
  std::string zone;
  std::optional<std::uint64_t> seed;
  std::string out_dir{"."};
  std::string log_dir{"."};
  std::string mode{"deterministic"};
  std::string dump_transcript;
  std::string out_trace;
  std::string out_gt;
};

class Context {
 public:
  Context(std::ostream& out, std::ostream& err) : out_(out), err_(err), level_(verbosity()) {}

  void info(const std::string& msg) const {
    if (level_ != Verbosity::Quiet) err_ << "[storesense] " << msg << "\n";
  }
  void debug(const std::string& msg) const {
    if (level_ == Verbosity::Debug) err_ << "[storesense] " << msg << "\n";
  }
  std::ostream& out() const { return out_; }

 private:
  std::ostream& out_;
  std::ostream& err_;
  Verbosity level_;
};

PipelineConfig resolve_config(const Options& o) {
  PipelineConfig cfg = o.config.empty() ? PipelineConfig{} : load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  return validate_config(cfg);
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create directory {}: {}", dir, ec.message()));
}

std::string in_dir(const std::string& dir, const char* name) { return (fs::path(dir) / name).string(); }

ItemZone resolve_zone(const Options& o) {
  const std::string& path = o.zone.empty() ? o.scenario : o.zone;
  if (path.empty()) throw ConfigError("a zone is required: pass --zone or --scenario");
  return zone_from_json_text(read_text_file(path));
}

std::string zone_json_text(const ItemZone& z) {
  ordered_json j;
  j["zone_id"] = z.zone_id;
  j["center"] = {z.center3d.x, z.center3d.y, z.center3d.z};
  j["rect2d"] = {z.rect2d.x, z.rect2d.y, z.rect2d.w, z.rect2d.h};
  j["half_extent"] = z.half_extent;
  j["item_ids"] = z.item_ids;
  return j.dump(2) + "\n";
}

int cmd_simulate(const Options& o, const Context& ctx) {
  if (o.scenario.empty()) throw ConfigError("simulate needs --scenario");
  const PipelineConfig cfg = resolve_config(o);
  const Scenario scenario = load_scenario(o.scenario);
  const SceneOutput scene = generate_scene(scenario, cfg, cfg.seed);
  ensure_dir(o.out_dir);
  const std::string trace_path = o.out_trace.empty() ? in_dir(o.out_dir, "trace.jsonl") : o.out_trace;
  const std::string gt_path = o.out_gt.empty() ? in_dir(o.out_dir, "truth.jsonl") : o.out_gt;
  write_trace_file(trace_path, scene.trace);
  write_ground_truth_file(gt_path, scene.truth);
  write_text_file(in_dir(o.out_dir, "zone.json"), zone_json_text(scenario.zone));
  ctx.info(fmt::format("scenario {}: {} frames, {} events, {} groups", scenario.name, scene.trace.size(),
                       scene.truth.events.size(), scene.truth.groups.size()));
  ctx.out() << trace_path << "\n" << gt_path << "\n";
  return 0;
}

int cmd_run(const Options& o, const Context& ctx) {
  if (o.trace.empty()) throw ConfigError("run needs --trace");
  if (o.mode != "deterministic" && o.mode != "concurrent") {
    throw ConfigError(fmt::format("unknown mode '{}'", o.mode));
  }
  const PipelineConfig cfg = resolve_config(o);
  const ItemZone zone = resolve_zone(o);
  const Trace trace = read_trace_file(o.trace);
  ctx.debug(fmt::format("read {} frames from {}", trace.size(), o.trace));

  RunOptions ro;
  ro.mode = o.mode == "concurrent" ? ExecutionMode::Concurrent : ExecutionMode::Deterministic;
  ro.record_transcript = !o.dump_transcript.empty();
  const PipelineResult result = run_pipeline(trace, cfg, zone, ro);

  ensure_dir(o.out_dir);
  const std::string table_path = in_dir(o.out_dir, "transitions.csv");
  const std::string full_path = in_dir(o.out_dir, "transitions_full.csv");
  const std::string groups_path = in_dir(o.out_dir, "groups.csv");
  {
    std::ostringstream s;
    write_transition_table(s, result.transitions);
    write_text_file(table_path, s.str());
  }
  {
    std::ostringstream s;
    write_transition_log(s, result.transitions);
    write_text_file(full_path, s.str());
  }
  {
    std::ostringstream s;
    write_group_log(s, result.groups);
    write_text_file(groups_path, s.str());
  }
  if (!o.dump_transcript.empty()) {
    std::string text;
    for (const auto& line : result.transcript) text += line + "\n";
    write_text_file(o.dump_transcript, text);
  }

  const RunCounters& c = result.counters;
  ordered_json m;
  m["version"] = kVersion;
  m["config_hash"] = config_hash(cfg);
  m["trace"] = o.trace;
  m["zone"] = o.zone.empty() ? o.scenario : o.zone;
  m["seed"] = cfg.seed;
  m["mode"] = o.mode;
  m["outputs"] = {{"transitions", table_path}, {"transitions_full", full_path}, {"groups", groups_path}};
  m["counters"] = {{"frames", c.frames},
                   {"observations", c.observations},
                   {"deliveries", c.deliveries},
                   {"published", c.published},
                   {"dropped_messages", c.dropped_messages},
                   {"rejected_events", c.rejected_events},
                   {"absence_leaves", c.absence_leaves},
                   {"reincarnations", c.reincarnations},
                   {"dropped_group_members", c.dropped_group_members},
                   {"transitions", result.transitions.size()},
                   {"group_ticks", result.groups.size()}};
  m["transcript_hash"] = fmt::format("{:016x}", result.transcript_hash);
  write_text_file(in_dir(o.out_dir, "run_manifest.json"), m.dump(2) + "\n");
  ctx.info(fmt::format("{} transitions, {} group rows", result.transitions.size(), result.groups.size()));
  ctx.out() << in_dir(o.out_dir, "run_manifest.json") << "\n";
  return 0;
}

struct Logs {
  std::vector<TransitionLogEntry> transitions;
  std::vector<GroupLogEntry> groups;
};

Logs read_logs(const std::string& dir) {
  Logs logs;
  {
    std::istringstream s(read_text_file(in_dir(dir, "transitions_full.csv")));
    logs.transitions = read_transition_log(s);
  }
  {
    std::istringstream s(read_text_file(in_dir(dir, "groups.csv")));
    logs.groups = read_group_log(s);
  }
  return logs;
}

int cmd_evaluate(const Options& o, const Context& ctx) {
  if (o.gt.empty()) throw ConfigError("evaluate needs --gt");
  const PipelineConfig cfg = resolve_config(o);
  const Logs logs = read_logs(o.log_dir);
  const GroundTruth truth = read_ground_truth_file(o.gt);
  const StateEvaluation states = evaluate_states(logs.transitions, truth.events, cfg);
  const GroupEvaluation groups = evaluate_groups(logs.groups, truth.groups, cfg);
  const std::string text = metrics_to_json_text(states, groups);
  ensure_dir(o.out_dir);
  write_text_file(in_dir(o.out_dir, "metrics.json"), text);
  ctx.info(fmt::format("metrics written to {}", in_dir(o.out_dir, "metrics.json")));
  ctx.out() << text;
  return 0;
}

int cmd_report(const Options& o, const Context& ctx) {
  const PipelineConfig cfg = resolve_config(o);
  const Logs logs = read_logs(o.log_dir);
  std::optional<TraceSpan> span;
  if (!o.trace.empty()) {
    const Trace trace = read_trace_file(o.trace);
    if (!trace.empty()) span = TraceSpan{trace.front().t, trace.back().t};
  }
  std::optional<ItemZone> zone;
  if (!o.zone.empty() || !o.scenario.empty()) zone = resolve_zone(o);
  ensure_dir(o.out_dir);
  for (const auto& [name, table] : all_reports(logs.transitions, logs.groups, cfg, zone, span)) {
    const std::string path = in_dir(o.out_dir, name.c_str());
    write_text_file(path, table.to_csv());
    ctx.out() << path << "\n";
  }
  ctx.info("reports written");
  return 0;
}

void print_error(std::ostream& err, const std::string& kind, const std::string& message) {
  ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  err << j.dump() << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Shopper behavior pipeline: simulate, run, evaluate, report", "storesense"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Pipeline config JSON");
    sub->add_option("--seed", o.seed, "Seed override");
    sub->add_option("--out-dir", o.out_dir, "Output directory");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "Generate a trace and ground truth from a scenario");
  common(simulate);
  simulate->add_option("--scenario", o.scenario, "Scenario JSON")->required();
  simulate->add_option("--out-trace", o.out_trace, "Trace path (default <out-dir>/trace.jsonl)");
  simulate->add_option("--out-gt", o.out_gt, "Ground truth path (default <out-dir>/truth.jsonl)");

  CLI::App* run = app.add_subcommand("run", "Run the pipeline over a trace");
  common(run);
  run->add_option("--trace", o.trace, "Trace JSONL")->required();
  run->add_option("--zone", o.zone, "Zone JSON");
  run->add_option("--scenario", o.scenario, "Scenario JSON providing the zone");
  run->add_option("--mode", o.mode, "deterministic or concurrent");
  run->add_option("--dump-transcript", o.dump_transcript, "Write the delivery transcript here");

  CLI::App* evaluate = app.add_subcommand("evaluate", "Score logs against ground truth");
  common(evaluate);
  evaluate->add_option("--log-dir", o.log_dir, "Directory holding transitions_full.csv and groups.csv");
  evaluate->add_option("--gt", o.gt, "Ground truth JSONL")->required();

  CLI::App* report = app.add_subcommand("report", "Write the analytics tables");
  common(report);
  report->add_option("--log-dir", o.log_dir, "Directory holding transitions_full.csv and groups.csv");
  report->add_option("--trace", o.trace, "Trace JSONL giving the time span");
  report->add_option("--zone", o.zone, "Zone JSON");
  report->add_option("--scenario", o.scenario, "Scenario JSON providing the zone");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::Success&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return 0;
  } catch (const CLI::ParseError& e) {
    print_error(err, "usage", e.what());
    return 2;
  }

  const Context ctx(out, err);
  try {
    if (simulate->parsed()) return cmd_simulate(o, ctx);
    if (run->parsed()) return cmd_run(o, ctx);
    if (evaluate->parsed()) return cmd_evaluate(o, ctx);
    return cmd_report(o, ctx);
  } catch (const Error& e) {
    print_error(err, e.kind(), e.what());
  } catch (const std::exception& e) {
    print_error(err, "internal", e.what());
  }
  return 1;
}

}  // namespace storesense
