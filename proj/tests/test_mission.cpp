// Copyright 2026 The Voxplan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "voxplan/mission.hpp"

#include <gtest/gtest.h>

#include "mission_fixtures.hpp"

using namespace voxplan;
using nlohmann::json;

TEST(MissionConfigParsing, DefaultsCoverOmittedKeys) {
  const MissionConfig c = parse_mission_config(json::object());
  EXPECT_DOUBLE_EQ(c.map_resolution, 0.2);
  EXPECT_EQ(c.local.n_samples, 300);
  EXPECT_DOUBLE_EQ(c.gain.gain_threshold, 30.0);
  EXPECT_DOUBLE_EQ(c.frontier_radius, 3.0);
  EXPECT_DOUBLE_EQ(c.bayes.p_hit, 0.7);
  EXPECT_EQ(c.bbox_grid_rows, 5);
}

TEST(MissionConfigParsing, UnknownKeysAreErrors) {
  json j = json::object();
  j["mision"] = {{"dt", 0.1}};  // typo'd section
  EXPECT_THROW(parse_mission_config(j), ConfigError);
  json j2 = json::object();
  j2["mission"] = {{"dtt", 0.1}};
  EXPECT_THROW(parse_mission_config(j2), ConfigError);
}

TEST(MissionConfigParsing, RangeValidation) {
  json j = json::object();
  j["robot"] = {{"v_ref", 0.0}};
  EXPECT_THROW(parse_mission_config(j), ConfigError);
  json j2 = json::object();
  j2["artifacts"] = {{"p_hit", 1.5}};
  EXPECT_THROW(parse_mission_config(j2), ConfigError);
}

TEST(MissionConfigParsing, RobotClassParsing) {
  json j = json::object();
  j["robot"] = {{"class", "legged"}};
  EXPECT_EQ(parse_mission_config(j).robot.robot_class, RobotClass::kLegged);
  j["robot"] = {{"class", "hovercraft"}};
  EXPECT_THROW(parse_mission_config(j), ConfigError);
}

TEST(Mission, ShortCorridorCompletesAndComesHome) {
  const World world =
      fixtures::make_world(fixtures::corridor_world_json(14.0));
  MissionConfig cfg =
      fixtures::make_config(fixtures::base_config_json(240.0, 3));
  MissionRunner runner(cfg, world);
  const MissionLog& log = runner.run();

  EXPECT_FALSE(log.summary.aborted);
  EXPECT_TRUE(log.summary.return_home_success);
  EXPECT_GE(log.summary.explored_fraction, 0.90);
  EXPECT_TRUE(fixtures::all_transitions_legal(log));
  // Timestamps strictly increasing.
  for (std::size_t i = 1; i < log.ticks.size(); ++i)
    EXPECT_GT(log.ticks[i].t, log.ticks[i - 1].t);
  // Per-tick travel never exceeds v_ref * dt.
  for (std::size_t i = 1; i < log.ticks.size(); ++i)
    EXPECT_LE(log.ticks[i].distance - log.ticks[i - 1].distance,
              cfg.robot.v_ref * cfg.dt + 1e-9);
  // The robot's true position stays inside ground-truth free space.
  for (const TickRecord& rec : log.ticks)
    EXPECT_TRUE(world.in_free_space(rec.true_pose.position));
}

TEST(Mission, ZeroTickRunMeasuresInitialFootprintOnly) {
  const World world =
      fixtures::make_world(fixtures::corridor_world_json(14.0));
  MissionConfig cfg =
      fixtures::make_config(fixtures::base_config_json(240.0, 3));
  MissionRunner runner(cfg, world);
  const MissionLog& log = runner.run(/*ticks_max=*/1);
  // One tick: a single scan from the start pose, no motion.
  EXPECT_EQ(log.ticks.size(), 1u);
  EXPECT_DOUBLE_EQ(log.ticks[0].distance, 0.0);
  const double direct = explored_fraction(runner.map(), world);
  EXPECT_DOUBLE_EQ(log.summary.explored_fraction, direct);
  EXPECT_GT(direct, 0.0);
  EXPECT_LT(direct, 0.9);
}

TEST(Mission, SmallBudgetTriggersEarlyHoming) {
  // The corridor takes ~25 s one way; a 30 s budget forces homing first.
  const World world =
      fixtures::make_world(fixtures::corridor_world_json(25.0));
  MissionConfig cfg = fixtures::make_config(fixtures::base_config_json(30.0, 5));
  MissionRunner runner(cfg, world);
  const MissionLog& log = runner.run();

  bool budget_homing = false;
  bool completion_before_homing = false;
  for (const auto& e : log.events) {
    const std::string type = e.value("type", "");
    if (type == "homing_triggered" && e.value("reason", "") == "budget")
      budget_homing = true;
    if (type == "local_completion" && !budget_homing)
      completion_before_homing = true;
  }
  EXPECT_TRUE(budget_homing);
  EXPECT_FALSE(completion_before_homing);
  EXPECT_TRUE(log.summary.return_home_success);
  EXPECT_LE(log.summary.t_home, 30.0);
}

TEST(Mission, GeofenceSetGrowsMonotonically) {
  const World world = fixtures::make_world(fixtures::strip_world_json());
  nlohmann::json cfg_json = fixtures::base_config_json(240.0, 7);
  cfg_json["robot"]["class"] = "legged";
  cfg_json["robot"]["v_ref"] = 0.45;
  MissionConfig cfg = fixtures::make_config(cfg_json);
  MissionRunner runner(cfg, world);

  std::size_t fences = 0;
  for (int i = 0; i < 4000; ++i) {
    runner.step();
    EXPECT_GE(runner.map().geofences().size(), fences);
    fences = runner.map().geofences().size();
  }
  EXPECT_GE(fences, 1u);  // the strip must have been fenced at least once
}

TEST(Mission, ScoreEqualsScoredReports) {
  const World world =
      fixtures::make_world(fixtures::artifact_corridor_world_json());
  nlohmann::json cfg_json = fixtures::base_config_json(600.0, 11);
  cfg_json["artifacts"] = {{"box_jitter_sigma", 0.02}};
  MissionConfig cfg = fixtures::make_config(cfg_json);
  MissionRunner runner(cfg, world);
  const MissionLog& log = runner.run();

  int scored = 0;
  for (const Report& r : log.reports) scored += r.scored.value_or(false);
  EXPECT_EQ(log.summary.score, scored);
  EXPECT_GT(scored, 0);
  // Every report event must reference an earlier confirmation of the same
  // hypothesis.
  for (const auto& e : log.events) {
    if (e.value("type", "") != "artifact_reported") continue;
    const int hyp = e.value("hypothesis", -1);
    bool confirmed_before = false;
    for (const auto& c : log.events) {
      if (c.value("type", "") == "artifact_confirmed" &&
          c.value("hypothesis", -2) == hyp &&
          c.value("t", 1e18) <= e.value("t", 0.0)) {
        confirmed_before = true;
        break;
      }
    }
    EXPECT_TRUE(confirmed_before);
  }
}

TEST(Mission, IdenticalSeedsProduceIdenticalLogs) {
  const World world =
      fixtures::make_world(fixtures::corridor_world_json(14.0));
  const MissionConfig cfg =
      fixtures::make_config(fixtures::base_config_json(120.0, 21));

  MissionRunner a(cfg, world), b(cfg, world);
  const MissionLog& la = a.run();
  const MissionLog& lb = b.run();
  ASSERT_EQ(la.ticks.size(), lb.ticks.size());
  for (std::size_t i = 0; i < la.ticks.size(); ++i) {
    EXPECT_EQ(la.ticks[i].true_pose.position, lb.ticks[i].true_pose.position);
    EXPECT_EQ(la.ticks[i].mode, lb.ticks[i].mode);
  }
  ASSERT_EQ(la.events.size(), lb.events.size());
  for (std::size_t i = 0; i < la.events.size(); ++i)
    EXPECT_EQ(la.events[i].dump(), lb.events[i].dump());
}

TEST(ExploredFraction, FullyKnownCorridorApproachesOne) {
  const World world =
      fixtures::make_world(fixtures::corridor_world_json(10.0));
  VoxelMap map = VoxelMap::covering(world.bounds, 0.2);
  // Mark exactly the explorable set as known.
  const auto mask = explorable_mask(map, world);
  const Vec3i dims = map.extents();
  Vec3i v;
  for (v.z() = 0; v.z() < dims.z(); ++v.z())
    for (v.y() = 0; v.y() < dims.y(); ++v.y())
      for (v.x() = 0; v.x() < dims.x(); ++v.x())
        if (mask[map.flat_index(v)])
          map.set_state(v, world.in_free_space(map.center_of(v))
                               ? VoxelState::kFree
                               : VoxelState::kOccupied);
  EXPECT_DOUBLE_EQ(explored_fraction(map, world), 1.0);
  // Knowledge outside the explorable set does not inflate the fraction.
  EXPECT_LE(explored_fraction(map, world), 1.0);
}

TEST(ExploredFraction, RegionFilterRestrictsTheDenominator) {
  const World world = fixtures::make_world(fixtures::tjunction_world_json());
  VoxelMap map = VoxelMap::covering(world.bounds, 0.2);
  const double all = explored_fraction(map, world);
  const double branch =
      explored_fraction(map, world, fixtures::tjunction_branch_a());
  EXPECT_DOUBLE_EQ(all, 0.0);
  EXPECT_DOUBLE_EQ(branch, 0.0);
}

TEST(MissionOutputs, WritersProduceWellFormedFiles) {
  const World world =
      fixtures::make_world(fixtures::corridor_world_json(14.0));
  const MissionConfig cfg =
      fixtures::make_config(fixtures::base_config_json(120.0, 2));
  MissionRunner runner(cfg, world);
  const MissionLog& log = runner.run();

  const std::string dir = testing::TempDir();
  write_metrics_csv(log, dir + "m.csv");
  write_events_jsonl(log, dir + "e.jsonl");
  write_reports_jsonl(log, dir + "r.jsonl");
  write_summary_json(log, dir + "s.json");
  write_global_graph_json(runner.global_graph(), dir + "g.json");

  std::ifstream csv(dir + "m.csv");
  std::string header;
  ASSERT_TRUE(std::getline(csv, header));
  EXPECT_EQ(header, "t,x,y,z,psi,rx,ry,rz,rpsi,mode,known_voxels,distance");
  std::size_t rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  EXPECT_EQ(rows, log.ticks.size());

  std::ifstream events(dir + "e.jsonl");
  std::size_t n_events = 0;
  for (std::string line; std::getline(events, line);) {
    EXPECT_NO_THROW(json::parse(line));
    ++n_events;
  }
  EXPECT_EQ(n_events, log.events.size());

  const json summary = json::parse(std::ifstream(dir + "s.json"));
  EXPECT_TRUE(summary.contains("explored_fraction"));
  const json graph = json::parse(std::ifstream(dir + "g.json"));
  EXPECT_TRUE(graph.contains("vertices"));
  EXPECT_TRUE(graph.contains("edges"));
}
