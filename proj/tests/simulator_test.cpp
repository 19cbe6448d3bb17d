#include <gtest/gtest.h>

#include <cmath>

#include "storesense/error.hpp"
#include "test_support.hpp"

using namespace storesense;
using namespace testsupport;

namespace {

// One customer walking in along +x, reaching 1.8 m at t=10, picking at 14, leaving at 20.
Scenario walk_in() {
  Scenario s;
  s.name = "walk_in";
  s.t_start = 0;
  s.t_end = 26;
  s.zone = test_zone();
  s.image = ImageModel{100, 500, 500, 0.5, 0.5};
  AgentScript a;
  a.person_id = 1;
  a.waypoints = {{0, {3.5, 1.2, 0}}, {10, {1.8, 1.2, 0}}, {12, {1.0, 1.2, 0}}, {19, {1.0, 1.2, 0}},
                 {22, {6.0, 1.2, 0}}, {24, {6.0, 1.2, 0}}};
  a.actions = {ApproachZone{10}, PickItem{14, 1.5, 12}, LeaveZone{20.8}};
  s.agents = {a};
  return s;
}

std::string scenario_error(const Scenario& s) {
  try {
    generate_scene(s, PipelineConfig{}, 0);
  } catch (const ScenarioError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Simulator, ApproachLabelAndNearRun) {
  const PipelineConfig cfg;
  const Scenario s = walk_in();
  const SceneOutput out = generate_scene(s, cfg, 0);
  ASSERT_FALSE(out.truth.events.empty());
  EXPECT_EQ(out.truth.events[0].event, BehaviorState::Approach);
  EXPECT_DOUBLE_EQ(out.truth.events[0].t, 10.0);
  // Direct scan: consecutive frames within approach_distance starting at t=10.
  int run = 0;
  for (const auto& f : out.trace) {
    if (f.t < 10.0 - 1e-9) continue;
    ASSERT_EQ(f.observations.size(), 1u);
    const auto& p = f.observations[0].pos3d;
    if (std::hypot(p.x, p.z) <= cfg.approach_distance + 1e-12) ++run;
    else break;
  }
  EXPECT_GE(run, cfg.window_frames);
}

TEST(Simulator, FramesFollowTheRate) {
  const SceneOutput out = generate_scene(walk_in(), PipelineConfig{}, 0);
  ASSERT_EQ(out.trace.size(), 261u);
  for (std::size_t i = 0; i < out.trace.size(); ++i) {
    EXPECT_EQ(out.trace[i].frame, static_cast<std::int64_t>(i));
    EXPECT_NEAR(out.trace[i].t, i / 10.0, 1e-9);
  }
}

TEST(Simulator, PickPutsAWristOnTheItems) {
  const PipelineConfig cfg;
  const SceneOutput out = generate_scene(walk_in(), cfg, 0);
  int picking = 0;
  for (const auto& f : out.trace) {
    for (const auto& o : f.observations) {
      const bool scripted = f.t >= 14 - 1e-9 && f.t < 15.5 - 1e-9;
      EXPECT_EQ(is_picking(o, test_zone(), cfg), scripted) << f.t;
      EXPECT_EQ(o.held_item.has_value(), scripted);
      picking += scripted;
    }
  }
  EXPECT_EQ(picking, 15);
}

TEST(Simulator, DeterministicForSeed) {
  Scenario s = walk_in();
  s.noise = NoiseModel{0.1, 0.05, 0.1, 0.2, 0.05};
  const auto a = generate_scene(s, PipelineConfig{}, 7);
  const auto b = generate_scene(s, PipelineConfig{}, 7);
  const auto c = generate_scene(s, PipelineConfig{}, 8);
  EXPECT_EQ(a.trace, b.trace);
  EXPECT_EQ(a.truth, b.truth);
  EXPECT_NE(a.trace, c.trace);
}

TEST(Simulator, FullDropoutKeepsTruth) {
  Scenario s = walk_in();
  const auto clean = generate_scene(s, PipelineConfig{}, 1);
  s.noise.dropout_prob = 1.0;
  const auto out = generate_scene(s, PipelineConfig{}, 1);
  std::size_t n = 0;
  for (const auto& f : out.trace) n += f.observations.size();
  EXPECT_EQ(n, 0u);
  EXPECT_EQ(out.truth, clean.truth);
  EXPECT_EQ(out.trace.size(), clean.trace.size());
}

TEST(Noise, ZeroIsIdentity) {
  const auto clean = generate_scene(walk_in(), PipelineConfig{}, 0);
  EXPECT_EQ(apply_noise(clean.trace, NoiseModel{}, 123), clean.trace);
}

TEST(Noise, PositionJitterHasZeroMean) {
  Trace trace;
  for (int i = 0; i < 2500; ++i) {
    TraceFrame f{i / 10.0, i, {}};
    for (int k = 0; k < 4; ++k) f.observations.push_back(snap(k, f.t, {1.0, 2.0, 3.0}, box_at(1, 3)));
    trace.push_back(f);
  }
  NoiseModel n;
  n.pos_sigma = 0.1;
  const Trace noisy = apply_noise(trace, n, 42);
  double sx = 0, sy = 0, sz = 0, sxx = 0;
  std::size_t count = 0;
  for (const auto& f : noisy) {
    for (const auto& o : f.observations) {
      sx += o.pos3d.x - 1.0;
      sy += o.pos3d.y - 2.0;
      sz += o.pos3d.z - 3.0;
      sxx += (o.pos3d.x - 1.0) * (o.pos3d.x - 1.0);
      EXPECT_EQ(o.bbox, box_at(1, 3));
      ++count;
    }
  }
  ASSERT_EQ(count, 10000u);
  const double bound = 3 * 0.1 / std::sqrt(10000.0);
  EXPECT_LT(std::abs(sx / count), bound);
  EXPECT_LT(std::abs(sy / count), bound);
  EXPECT_LT(std::abs(sz / count), bound);
  EXPECT_NEAR(std::sqrt(sxx / count), 0.1, 0.005);
}

TEST(Noise, TypeFlipInvertsEveryone) {
  const auto clean = generate_scene(walk_in(), PipelineConfig{}, 0);
  NoiseModel n;
  n.type_flip_prob = 1.0;
  const Trace flipped = apply_noise(clean.trace, n, 3);
  for (const auto& f : flipped)
    for (const auto& o : f.observations) EXPECT_EQ(o.person_type, PersonType::Staff);
}

TEST(Noise, MisclassificationPicksAnotherItem) {
  const auto clean = generate_scene(walk_in(), PipelineConfig{}, 0);
  NoiseModel n;
  n.misclass_prob = 1.0;
  const std::vector<ItemId> items{11, 12, 13};
  const Trace noisy = apply_noise(clean.trace, n, 3, items);
  int seen = 0;
  for (const auto& f : noisy)
    for (const auto& o : f.observations)
      if (o.held_item) {
        EXPECT_NE(*o.held_item, 12);
        ++seen;
      }
  EXPECT_EQ(seen, 15);
}

TEST(Noise, InvalidProbabilityRejected) {
  NoiseModel n;
  n.dropout_prob = 1.5;
  EXPECT_THROW(validate_noise(n), ScenarioError);
}

TEST(Scenario, GeometryThatCannotApproachNamesTheAgent) {
  Scenario s = walk_in();
  s.agents[0].waypoints = {{0, {3.5, 1.2, 0}}, {24, {3.0, 1.2, 0}}};
  s.agents[0].actions = {ApproachZone{10}};
  EXPECT_NE(scenario_error(s).find("agent 1: approach"), std::string::npos);
}

TEST(Scenario, ValidationErrors) {
  Scenario s = walk_in();
  s.agents.push_back(s.agents[0]);
  EXPECT_NE(scenario_error(s).find("duplicate person_id"), std::string::npos);

  s = walk_in();
  s.agents[0].actions.push_back(PickItem{14.5, 1.0, 12});
  EXPECT_NE(scenario_error(s).find("overlapping picks"), std::string::npos);

  s = walk_in();
  s.agents[0].actions = {ApproachZone{10}, PickItem{14, 0.3, 12}, LeaveZone{20.8}};
  EXPECT_NE(scenario_error(s).find("too short"), std::string::npos);

  s = walk_in();
  s.agents[0].actions = {ApproachZone{10}, PickItem{14, 1.5, 99}, LeaveZone{20.8}};
  EXPECT_NE(scenario_error(s).find("not on the table"), std::string::npos);

  s = walk_in();
  s.agents[0].actions.push_back(JoinFormation{2, 4, {1}, GroupType::Circular});
  EXPECT_FALSE(scenario_error(s).empty());
}

TEST(Scenario, FormationPlacesPartnersAndLabelsGroup) {
  const PipelineConfig cfg;
  for (GroupType type : {GroupType::VisVis, GroupType::SideBySide, GroupType::LShape}) {
    Scenario s;
    s.t_start = 0;
    s.t_end = 10;
    s.zone = test_zone();
    AgentScript a{20, PersonType::Customer, {{0, {0, 1.6, 2.6}}, {10, {0, 1.6, 2.6}}},
                  {FaceToward{0, Vec3{10, 1.6, 2.6}}, JoinFormation{2, 6, {21}, type}}};
    AgentScript b{21, PersonType::Customer, {{2, {-3.5, 1.6, -3.5}}, {10, {-3.5, 1.6, -3.5}}}, {LeaveZone{6}}};
    s.agents = {a, b};
    const SceneOutput out = generate_scene(s, cfg, 0);
    ASSERT_EQ(out.truth.groups.size(), 1u);
    EXPECT_EQ(out.truth.groups[0].member_ids, (std::vector<PersonId>{20, 21}));
    for (const auto& f : out.trace) {
      if (f.observations.size() != 2) continue;
      const auto groups = detect_groups(f.observations, cfg);
      const bool inside = f.t >= 2 - 1e-9 && f.t < 6 - 1e-9;
      ASSERT_EQ(groups.size(), inside ? 1u : 0u) << f.t;
      if (inside) {
        EXPECT_EQ(classify_group(f.observations, cfg), type);
      }
    }
  }
}

TEST(Scenario, JsonParsing) {
  const Scenario s = scenario_from_json_text(R"({
    "name": "x", "t_start": 0, "t_end": 5,
    "zone": {"zone_id": 3, "center": [0,1,0], "rect2d": [1,2,3,4], "half_extent": 0.5, "item_ids": [1]},
    "noise": {"pos_sigma": 0.2},
    "agents": [{"id": 4, "type": "staff", "waypoints": [[0,1,1,1],[5,2,1,2]],
                "actions": [{"kind":"face","t":1,"person":4}, {"kind":"leave","t":2}]}]})");
  EXPECT_EQ(s.zone.zone_id, 3);
  EXPECT_DOUBLE_EQ(s.noise.pos_sigma, 0.2);
  ASSERT_EQ(s.agents.size(), 1u);
  EXPECT_EQ(s.agents[0].person_type, PersonType::Staff);
  EXPECT_EQ(s.agents[0].actions.size(), 2u);
  EXPECT_THROW(scenario_from_json_text(R"({"t_start":0})"), ScenarioError);
  EXPECT_THROW(scenario_from_json_text("[1,2"), ScenarioError);
}

TEST(Corpus, EveryScenarioGenerates) {
  const auto paths = corpus_paths();
  EXPECT_GE(paths.size(), 10u);
  for (const auto& p : paths) {
    EXPECT_NO_THROW(generate_scene(load_scenario(p), PipelineConfig{}, 0)) << p;
  }
}
