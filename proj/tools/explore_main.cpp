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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "voxplan/mission.hpp"
#include "voxplan/world.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Headless exploration mission simulator"};

  std::string world_path, config_path, out_dir;
  std::uint64_t seed = 1;
  std::size_t ticks_max = std::numeric_limits<std::size_t>::max();
  bool export_map = false, export_graph = false;

  app.add_option("--world", world_path, "World file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--config", config_path, "Mission config file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "RNG seed (overrides the config seed)")
      ->required();
  app.add_option("--out", out_dir, "Output directory")->required();
  app.add_option("--ticks-max", ticks_max, "Stop after N simulation ticks");
  app.add_flag("--export-map", export_map, "Write the final occupancy map");
  app.add_flag("--export-graph", export_graph, "Write the global graph JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    voxplan::World world = voxplan::load_world(world_path);
    voxplan::MissionConfig config = voxplan::load_mission_config(config_path);
    config.seed = seed;

    std::filesystem::create_directories(out_dir);
    voxplan::MissionRunner runner(std::move(config), std::move(world));
    const voxplan::MissionLog& log = runner.run(ticks_max);

    const std::filesystem::path out(out_dir);
    voxplan::write_metrics_csv(log, (out / "metrics.csv").string());
    voxplan::write_events_jsonl(log, (out / "events.jsonl").string());
    voxplan::write_reports_jsonl(log, (out / "reports.jsonl").string());
    voxplan::write_summary_json(log, (out / "summary.json").string());
    if (export_map) {
      std::ofstream os(out / "map.txt");
      runner.map().export_text(os);
    }
    if (export_graph)
      voxplan::write_global_graph_json(runner.global_graph(),
                                       (out / "global_graph.json").string());

    const auto& s = log.summary;
    std::printf(
        "mission %s: explored %.1f%%, score %d/%zu, distance %.1f m, "
        "%d planning iterations\n",
        s.aborted ? "ABORTED" : "complete", 100.0 * s.explored_fraction,
        s.score, runner.world().artifacts.size(), s.distance_m,
        s.planning_iterations);
    return s.aborted ? 2 : 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
