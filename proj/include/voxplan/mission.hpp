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

#ifndef VOXPLAN_MISSION_HPP
#define VOXPLAN_MISSION_HPP

#include <chrono>
#include <cstdio>
#include <deque>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "voxplan/artifact.hpp"
#include "voxplan/global_planner.hpp"
#include "voxplan/graph.hpp"
#include "voxplan/local_planner.hpp"
#include "voxplan/path_refiner.hpp"
#include "voxplan/sensor.hpp"
#include "voxplan/voxel_map.hpp"
#include "voxplan/world.hpp"

namespace voxplan {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what)
      : std::runtime_error("mission config: " + what) {}
};

/// Full mission parameterization. Every field has a default; the JSON config
/// file overrides them and unknown keys are rejected.
struct MissionConfig {
  RobotModel robot;
  SensorFrustum sensor;
  double range_noise_sigma = 0.0;
  SensorFrustum camera{8.0, 1.5, 1.2, kPi / 90.0, Vec3::Zero()};
  double map_resolution = 0.2;

  LocalPlannerParams local;
  GainParams gain;
  int exploration_history = 10;

  double frontier_radius = 3.0;   // lambda
  double dtw_threshold = 4.0;
  double epsilon_d = 0.02;
  double safety_margin_s = 30.0;

  DetectionParams detection;
  BayesParams bayes;
  double sphere_radius = 1.0;  // R_a
  int bbox_grid_rows = 5;
  int bbox_grid_cols = 5;

  double time_limit_s = 600.0;
  double dt = 0.1;
  std::uint64_t seed = 1;
  std::optional<double> refine_clearance;  // default: 2 x max body half extent
  int refine_iterations = 10;

  double target_clearance() const {
    return refine_clearance ? *refine_clearance
                            : 2.0 * robot.box_half.maxCoeff();
  }

  TimeBudget budget(double elapsed) const {
    return {time_limit_s - elapsed, robot.v_ref, epsilon_d, safety_margin_s};
  }

  void validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw ConfigError(what);
    };
    require(robot.v_ref > 0.0, "robot.v_ref must be > 0");
    require(robot.yaw_rate_max > 0.0, "robot.yaw_rate_max must be > 0");
    require(robot.reverse_distance >= 0.0, "robot.reverse_distance must be >= 0");
    require(robot.localization_sigma >= 0.0,
            "robot.localization_sigma must be >= 0");
    require(robot.box_half.minCoeff() > 0.0,
            "robot.bounding_box_half must be > 0");
    sensor.validate();
    camera.validate();
    require(range_noise_sigma >= 0.0, "sensor.range_noise_sigma must be >= 0");
    require(map_resolution > 0.0, "map.resolution must be > 0");
    require(local.n_samples > 0, "local_planner.n_samples must be > 0");
    require(local.edge_radius > 0.0, "local_planner.edge_radius must be > 0");
    require(local.bound.dimensions.minCoeff() > 0.0,
            "local_planner.bound_dimensions must be > 0");
    require(gain.zeta >= 0.0, "local_planner.zeta must be >= 0");
    require(gain.delta_gain >= 0.0, "local_planner.delta_gain must be >= 0");
    require(gain.gain_threshold > 0.0,
            "local_planner.gain_threshold must be > 0");
    require(gain.resample_spacing > 0.0,
            "local_planner.dtw_resample_spacing must be > 0");
    require(exploration_history > 0,
            "local_planner.exploration_history must be > 0");
    require(frontier_radius > 0.0, "global_planner.frontier_radius must be > 0");
    require(dtw_threshold > 0.0, "global_planner.dtw_threshold must be > 0");
    require(epsilon_d >= 0.0, "global_planner.epsilon_d must be >= 0");
    require(safety_margin_s >= 0.0,
            "global_planner.safety_margin_s must be >= 0");
    require(detection.detection_range > 0.0,
            "artifacts.detection_range must be > 0");
    require(detection.proximity_range > 0.0,
            "artifacts.proximity_range must be > 0");
    require(detection.false_negative_rate >= 0.0 &&
                detection.false_negative_rate < 1.0,
            "artifacts.false_negative_rate must be in [0, 1)");
    require(detection.box_jitter_sigma >= 0.0,
            "artifacts.box_jitter_sigma must be >= 0");
    require(detection.box_angular_size > 0.0,
            "artifacts.box_angular_size must be > 0");
    require(bayes.p_hit > 0.0 && bayes.p_hit < 1.0,
            "artifacts.p_hit must be in (0, 1)");
    require(bayes.p_miss > 0.0 && bayes.p_miss < 1.0,
            "artifacts.p_miss must be in (0, 1)");
    require(bayes.confirm_threshold > 0.0 && bayes.confirm_threshold < 1.0,
            "artifacts.confirm_threshold must be in (0, 1)");
    require(sphere_radius > 0.0, "artifacts.sphere_radius must be > 0");
    require(bbox_grid_rows >= 1 && bbox_grid_cols >= 1,
            "artifacts.grid must be >= 1 per axis");
    require(time_limit_s > 0.0, "mission.time_limit_s must be > 0");
    require(dt > 0.0, "mission.dt must be > 0");
    require(refine_iterations >= 0, "mission.refine_iterations must be >= 0");
  }
};

namespace detail {

inline void reject_unknown_config_keys(const nlohmann::json& j,
                                       const std::set<std::string>& allowed,
                                       const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      throw ConfigError("unknown key '" + key + "' in " + where);
}

inline Vec3 config_vec3(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3)
    throw ConfigError(field + " must be an array of 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline void parse_frustum(const nlohmann::json& j, const std::string& where,
                          SensorFrustum& f) {
  reject_unknown_config_keys(j,
                             {"max_range", "fov_h", "fov_v", "angular_step",
                              "mount_offset", "range_noise_sigma"},
                             where);
  f.max_range = j.value("max_range", f.max_range);
  f.fov_h = j.value("fov_h", f.fov_h);
  f.fov_v = j.value("fov_v", f.fov_v);
  f.angular_step = j.value("angular_step", f.angular_step);
  if (j.contains("mount_offset"))
    f.mount_offset = config_vec3(j.at("mount_offset"), where + ".mount_offset");
}

}  // namespace detail

inline MissionConfig parse_mission_config(const nlohmann::json& j) {
  MissionConfig c;
  detail::reject_unknown_config_keys(
      j,
      {"robot", "sensor", "camera", "map", "local_planner", "global_planner",
       "artifacts", "mission"},
      "config");

  if (j.contains("robot")) {
    const auto& r = j.at("robot");
    detail::reject_unknown_config_keys(
        r,
        {"class", "v_ref", "yaw_rate_max", "reverse_distance",
         "localization_sigma", "bounding_box_half"},
        "robot");
    if (r.contains("class")) {
      const std::string cls = r.at("class").get<std::string>();
      if (cls == "legged") c.robot.robot_class = RobotClass::kLegged;
      else if (cls == "aerial") c.robot.robot_class = RobotClass::kAerial;
      else throw ConfigError("robot.class must be 'legged' or 'aerial'");
    }
    c.robot.v_ref = r.value("v_ref", c.robot.v_ref);
    c.robot.yaw_rate_max = r.value("yaw_rate_max", c.robot.yaw_rate_max);
    c.robot.reverse_distance =
        r.value("reverse_distance", c.robot.reverse_distance);
    c.robot.localization_sigma =
        r.value("localization_sigma", c.robot.localization_sigma);
    if (r.contains("bounding_box_half"))
      c.robot.box_half =
          detail::config_vec3(r.at("bounding_box_half"), "robot.bounding_box_half");
  }
  if (j.contains("sensor")) {
    detail::parse_frustum(j.at("sensor"), "sensor", c.sensor);
    c.range_noise_sigma = j.at("sensor").value("range_noise_sigma", 0.0);
  }
  if (j.contains("camera"))
    detail::parse_frustum(j.at("camera"), "camera", c.camera);
  if (j.contains("map")) {
    detail::reject_unknown_config_keys(j.at("map"), {"resolution"}, "map");
    c.map_resolution = j.at("map").value("resolution", c.map_resolution);
  }
  if (j.contains("local_planner")) {
    const auto& l = j.at("local_planner");
    detail::reject_unknown_config_keys(
        l,
        {"bound_dimensions", "n_samples", "edge_radius", "zeta", "delta_gain",
         "gain_threshold", "mode", "vertical_floor_height",
         "vertical_gain_bonus", "exploration_history", "dtw_resample_spacing"},
        "local_planner");
    if (l.contains("bound_dimensions"))
      c.local.bound.dimensions =
          detail::config_vec3(l.at("bound_dimensions"),
                              "local_planner.bound_dimensions");
    c.local.n_samples = l.value("n_samples", c.local.n_samples);
    c.local.edge_radius = l.value("edge_radius", c.local.edge_radius);
    c.gain.zeta = l.value("zeta", c.gain.zeta);
    c.gain.delta_gain = l.value("delta_gain", c.gain.delta_gain);
    c.gain.gain_threshold = l.value("gain_threshold", c.gain.gain_threshold);
    c.gain.resample_spacing =
        l.value("dtw_resample_spacing", c.gain.resample_spacing);
    if (l.contains("mode")) {
      const std::string mode = l.at("mode").get<std::string>();
      if (mode == "horizontal") c.local.mode = SamplingMode::kHorizontal;
      else if (mode == "vertical") c.local.mode = SamplingMode::kVertical;
      else throw ConfigError("local_planner.mode must be horizontal or vertical");
    }
    c.local.vertical_floor_height =
        l.value("vertical_floor_height", c.local.vertical_floor_height);
    c.local.vertical_gain_bonus =
        l.value("vertical_gain_bonus", c.local.vertical_gain_bonus);
    c.exploration_history =
        l.value("exploration_history", c.exploration_history);
  }
  if (j.contains("global_planner")) {
    const auto& g = j.at("global_planner");
    detail::reject_unknown_config_keys(
        g, {"frontier_radius", "dtw_threshold", "epsilon_d", "safety_margin_s"},
        "global_planner");
    c.frontier_radius = g.value("frontier_radius", c.frontier_radius);
    c.dtw_threshold = g.value("dtw_threshold", c.dtw_threshold);
    c.epsilon_d = g.value("epsilon_d", c.epsilon_d);
    c.safety_margin_s = g.value("safety_margin_s", c.safety_margin_s);
  }
  if (j.contains("artifacts")) {
    const auto& a = j.at("artifacts");
    detail::reject_unknown_config_keys(
        a,
        {"sphere_radius", "grid_rows", "grid_cols", "p_hit", "p_miss",
         "confirm_threshold", "detection_range", "proximity_range",
         "false_negative_rate", "box_jitter_sigma", "box_angular_size"},
        "artifacts");
    c.detection.detection_range =
        a.value("detection_range", c.detection.detection_range);
    c.detection.proximity_range =
        a.value("proximity_range", c.detection.proximity_range);
    c.detection.false_negative_rate =
        a.value("false_negative_rate", c.detection.false_negative_rate);
    c.detection.box_jitter_sigma =
        a.value("box_jitter_sigma", c.detection.box_jitter_sigma);
    c.detection.box_angular_size =
        a.value("box_angular_size", c.detection.box_angular_size);
    c.bayes.p_hit = a.value("p_hit", c.bayes.p_hit);
    c.bayes.p_miss = a.value("p_miss", c.bayes.p_miss);
    c.bayes.confirm_threshold =
        a.value("confirm_threshold", c.bayes.confirm_threshold);
    c.bbox_grid_rows = a.value("grid_rows", c.bbox_grid_rows);
    c.bbox_grid_cols = a.value("grid_cols", c.bbox_grid_cols);
    c.sphere_radius = a.value("sphere_radius", c.sphere_radius);
  }
  if (j.contains("mission")) {
    const auto& m = j.at("mission");
    detail::reject_unknown_config_keys(
        m,
        {"time_limit_s", "dt", "seed", "refine_clearance",
         "refine_iterations"},
        "mission");
    c.time_limit_s = m.value("time_limit_s", c.time_limit_s);
    c.dt = m.value("dt", c.dt);
    c.seed = m.value("seed", c.seed);
    if (m.contains("refine_clearance"))
      c.refine_clearance = m.at("refine_clearance").get<double>();
    c.refine_iterations = m.value("refine_iterations", c.refine_iterations);
  }
  c.robot.endurance_s = c.time_limit_s;
  c.validate();
  return c;
}

inline MissionConfig load_mission_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("parse error: ") + e.what());
  }
  return parse_mission_config(j);
}

enum class MissionMode {
  kExplore,
  kExecute,
  kBlocked,
  kReposition,
  kHome,
  kTerminated,
};

inline const char* mission_mode_name(MissionMode m) {
  switch (m) {
    case MissionMode::kExplore: return "explore";
    case MissionMode::kExecute: return "execute";
    case MissionMode::kBlocked: return "blocked";
    case MissionMode::kReposition: return "reposition";
    case MissionMode::kHome: return "home";
    default: return "terminated";
  }
}

struct TickRecord {
  double t = 0.0;
  RobotConfig true_pose;
  RobotConfig reported_pose;
  MissionMode mode = MissionMode::kExplore;
  std::size_t known_voxels = 0;
  double distance = 0.0;
};

struct MissionSummary {
  double explored_fraction = 0.0;
  std::size_t explorable_voxels = 0;
  std::size_t known_explorable_voxels = 0;
  int score = 0;
  int reports = 0;
  double distance_m = 0.0;
  bool return_home_success = false;
  bool aborted = false;
  double t_end = 0.0;
  double t_home = -1.0;
  int planning_iterations = 0;
  double planning_wall_ms_mean = 0.0;
  double planning_wall_ms_max = 0.0;
  std::uint64_t seed = 0;
};

struct MissionLog {
  std::vector<TickRecord> ticks;
  std::vector<nlohmann::json> events;
  std::vector<Report> reports;
  MissionSummary summary;
};

/// Fraction of the world the planner could have mapped: ground-truth free
/// voxels reachable from the start by flood fill, plus the surface shell
/// adjacent to them (what range sensing can ever turn occupied). Computed on
/// the same grid as `map` so known counts compare directly.
inline std::vector<std::uint8_t> explorable_mask(const VoxelMap& map,
                                                 const World& world) {
  const Vec3i dims = map.extents();
  const std::size_t n = map.num_voxels();
  std::vector<std::uint8_t> free_gt(n, 0);
  Vec3i v;
  for (v.z() = 0; v.z() < dims.z(); ++v.z())
    for (v.y() = 0; v.y() < dims.y(); ++v.y())
      for (v.x() = 0; v.x() < dims.x(); ++v.x())
        if (world.in_free_space(map.center_of(v)))
          free_gt[map.flat_index(v)] = 1;

  std::vector<std::uint8_t> mask(n, 0);
  std::deque<Vec3i> queue;
  auto seed = map.voxel_of(world.start.position);
  if (!seed) return mask;
  // The start voxel center may sit just outside a thin free box; nudge to a
  // free neighbor if needed.
  if (!free_gt[map.flat_index(*seed)]) {
    static const Vec3i dirs[6] = {{1, 0, 0},  {-1, 0, 0}, {0, 1, 0},
                                  {0, -1, 0}, {0, 0, 1},  {0, 0, -1}};
    for (const Vec3i& d : dirs) {
      const Vec3i cand = *seed + d;
      if (map.in_grid(cand) && free_gt[map.flat_index(cand)]) {
        seed = cand;
        break;
      }
    }
  }
  if (!free_gt[map.flat_index(*seed)]) return mask;
  mask[map.flat_index(*seed)] = 1;
  queue.push_back(*seed);
  static const Vec3i dirs[6] = {{1, 0, 0},  {-1, 0, 0}, {0, 1, 0},
                                {0, -1, 0}, {0, 0, 1},  {0, 0, -1}};
  while (!queue.empty()) {
    const Vec3i cur = queue.front();
    queue.pop_front();
    for (const Vec3i& d : dirs) {
      const Vec3i next = cur + d;
      if (!map.in_grid(next)) continue;
      const std::size_t idx = map.flat_index(next);
      if (mask[idx] || !free_gt[idx]) continue;
      mask[idx] = 1;
      queue.push_back(next);
    }
  }
  // Surface shell: non-free voxels face-adjacent to reachable free space.
  std::vector<std::uint8_t> shell(n, 0);
  for (v.z() = 0; v.z() < dims.z(); ++v.z())
    for (v.y() = 0; v.y() < dims.y(); ++v.y())
      for (v.x() = 0; v.x() < dims.x(); ++v.x()) {
        const std::size_t idx = map.flat_index(v);
        if (!mask[idx]) continue;
        for (const Vec3i& d : dirs) {
          const Vec3i nb = v + d;
          if (!map.in_grid(nb)) continue;
          const std::size_t nidx = map.flat_index(nb);
          if (!free_gt[nidx]) shell[nidx] = 1;
        }
      }
  for (std::size_t i = 0; i < n; ++i)
    if (shell[i]) mask[i] = 1;
  return mask;
}

/// Explored fraction over the explorable set, optionally restricted to a
/// region (voxel centers inside the box).
inline double explored_fraction(const VoxelMap& map, const World& world,
                                const std::optional<Aabb>& region = {}) {
  const auto mask = explorable_mask(map, world);
  const Vec3i dims = map.extents();
  std::size_t explorable = 0, known = 0;
  Vec3i v;
  for (v.z() = 0; v.z() < dims.z(); ++v.z())
    for (v.y() = 0; v.y() < dims.y(); ++v.y())
      for (v.x() = 0; v.x() < dims.x(); ++v.x()) {
        const std::size_t idx = map.flat_index(v);
        if (!mask[idx]) continue;
        if (region && !region->contains(map.center_of(v))) continue;
        ++explorable;
        if (map.state(v) != VoxelState::kUnknown) ++known;
      }
  if (explorable == 0) return 0.0;
  return static_cast<double>(known) / static_cast<double>(explorable);
}

/// The mission state machine: sense, map, plan, execute, recover, home.
class MissionRunner {
 public:
  MissionRunner(MissionConfig config, World world)
      : cfg_(std::move(config)),
        world_(std::move(world)),
        map_(VoxelMap::covering(world_.bounds, cfg_.map_resolution)),
        global_(RobotConfig(world_.home, world_.start.heading,
                            cfg_.robot.box_half),
                cfg_.local.edge_radius, cfg_.frontier_radius),
        hypotheses_(cfg_.sphere_radius, cfg_.bayes),
        noise_(cfg_.robot.localization_sigma, cfg_.seed ^ 0x9e3779b97f4a7c15ULL),
        sample_rng_(cfg_.seed),
        scan_rng_(cfg_.seed ^ 0xd1b54a32d192ed03ULL),
        detect_rng_(cfg_.seed ^ 0x94d049bb133111ebULL) {
    pose_true_ = world_.start;
    pose_true_.box_half = cfg_.robot.box_half;
    consumed_.assign(world_.artifacts.size(), false);
    trail_.push_back(reported().position);
  }

  const MissionLog& run(std::size_t ticks_max =
                            std::numeric_limits<std::size_t>::max()) {
    const double grace = 120.0;
    while (mode_ != MissionMode::kTerminated && tick_ < ticks_max &&
           t() <= cfg_.time_limit_s + grace) {
      step();
    }
    if (mode_ != MissionMode::kTerminated && !log_.summary.aborted) {
      event("mission_timeout", {});
      log_.summary.aborted = true;
    }
    finalize_summary();
    return log_;
  }

  /// Advances the simulation by one tick.
  void step() {
    const double now = t();
    if (mode_ == MissionMode::kExecute || mode_ == MissionMode::kReposition ||
        mode_ == MissionMode::kHome || mode_ == MissionMode::kBlocked) {
      move_phase(now);
    }
    sense_phase();
    artifact_phase(now);
    if (mode_ == MissionMode::kExecute || mode_ == MissionMode::kReposition)
      budget_phase(now);
    if (mode_ == MissionMode::kExplore) plan_phase(now);

    TickRecord rec;
    rec.t = now;
    rec.true_pose = pose_true_;
    rec.reported_pose = reported();
    rec.mode = mode_;
    rec.known_voxels = map_.known_count();
    rec.distance = distance_;
    log_.ticks.push_back(rec);
    ++tick_;
  }

  const MissionLog& log() const { return log_; }
  const VoxelMap& map() const { return map_; }
  const GlobalGraph& global_graph() const { return global_; }
  const World& world() const { return world_; }
  double t() const { return tick_ * cfg_.dt; }

 private:
  RobotConfig reported() const { return noise_.reported(pose_true_); }

  void event(const std::string& type, nlohmann::json fields) {
    fields["t"] = t();
    fields["type"] = type;
    log_.events.push_back(std::move(fields));
  }

  void transition(MissionMode to) {
    if (mode_ == to) return;
    event("mode_transition", {{"from", mission_mode_name(mode_)},
                              {"to", mission_mode_name(to)}});
    mode_ = to;
  }

  static nlohmann::json path_json(const PlannedPath& p) {
    nlohmann::json verts = nlohmann::json::array();
    for (const PathVertex& v : p.vertices)
      verts.push_back({v.config.position.x(), v.config.position.y(),
                       v.config.position.z(), v.config.heading});
    return verts;
  }

  void issue_path(PlannedPath path, PathKind kind, int origin_vertex) {
    path.kind = kind;
    PlannedPath refined =
        refine(path, map_, cfg_.robot.box_half,
               {cfg_.target_clearance(), cfg_.refine_iterations});
    HeadingParams hp{cfg_.robot.v_ref, cfg_.robot.yaw_rate_max,
                     cfg_.robot.robot_class};
    assign_headings(refined, hp);
    event("plan_issued", {{"kind", path_kind_name(kind)},
                          {"gain", path.gain},
                          {"length", refined.length},
                          {"vertices", path_json(refined)}});
    follower_ = PathFollower(std::move(refined), cfg_.robot.robot_class);
    path_origin_vertex_ = origin_vertex;
  }

  void move_phase(double now) {
    if (!follower_) {
      transition(MissionMode::kExplore);
      return;
    }
    const double step_len = cfg_.robot.v_ref * cfg_.dt;

    if (mode_ == MissionMode::kBlocked) {
      const double moved = follower_->reverse(
          std::min(step_len, reverse_remaining_));
      reverse_remaining_ -= moved;
      apply_follower_pose();
      distance_ += moved;
      if (reverse_remaining_ <= 1e-9 || follower_->progress() <= 1e-9) {
        event("reversed", {{"distance", cfg_.robot.reverse_distance}});
        add_recovery_geofence();
        follower_.reset();
        transition(MissionMode::kExplore);
      }
      return;
    }

    // Traversability guard runs while executing local or global paths.
    if (mode_ != MissionMode::kHome) {
      const Vec3 dir = follower_->direction();
      const auto blocked =
          traversability_lookahead(cfg_.robot, pose_true_.position, dir, world_);
      if (blocked) {
        pending_geofence_center_ = *blocked + noise_.offset();
        event("blocked",
              {{"position",
                {pose_true_.position.x(), pose_true_.position.y(),
                 pose_true_.position.z()}},
               {"blocked_point", {blocked->x(), blocked->y(), blocked->z()}}});
        if (mode_ == MissionMode::kExecute) {
          reverse_remaining_ = cfg_.robot.reverse_distance;
          transition(MissionMode::kBlocked);
        } else {
          // Repositioning: stop, mark, and replan without reversing.
          add_recovery_geofence();
          merge_executed_prefix();
          follower_.reset();
          transition(MissionMode::kExplore);
        }
        return;
      }
    }

    const double moved = follower_->advance(step_len);
    const RobotConfig map_pose = follower_->current_pose();
    const Vec3 new_true = map_pose.position - noise_.offset();
    if (!world_.in_free_space(new_true)) {
      // Physical contact: refuse the step and hold position.
      follower_->reverse(moved);
      ++stall_ticks_;
      if (stall_ticks_ > 20) {
        event("stall_replan", {});
        stall_ticks_ = 0;
        merge_executed_prefix();
        follower_.reset();
        transition(MissionMode::kExplore);
      }
      return;
    }
    stall_ticks_ = 0;
    pose_true_.position = new_true;
    pose_true_.heading = map_pose.heading;
    distance_ += moved;
    record_trail();
    if (cfg_.robot.robot_class == RobotClass::kLegged &&
        world_.in_non_traversable(pose_true_.position))
      throw std::logic_error("robot entered a non-traversable region");

    if (follower_->complete()) {
      if (merge_on_complete_) merge_executed_full();
      merge_on_complete_ = true;
      follower_.reset();
      if (mode_ == MissionMode::kHome) {
        event("mission_complete", {{"t_home", now}});
        log_.summary.t_home = now;
        transition(MissionMode::kTerminated);
      } else {
        transition(MissionMode::kExplore);
      }
    }
  }

  void apply_follower_pose() {
    const RobotConfig map_pose = follower_->current_pose();
    pose_true_.position = map_pose.position - noise_.offset();
    pose_true_.heading = map_pose.heading;
    record_trail();
  }

  void record_trail() {
    const Vec3 p = reported().position;
    if ((trail_.back() - p).norm() >= 0.05) trail_.push_back(p);
  }

  void add_recovery_geofence() {
    if (!pending_geofence_center_) return;
    const Aabb box = Aabb::from_center_half(*pending_geofence_center_,
                                            Vec3::Constant(0.5));
    map_.add_geofence(box);
    event("geofence_added",
          {{"min", {box.min.x(), box.min.y(), box.min.z()}},
           {"max", {box.max.x(), box.max.y(), box.max.z()}}});
    pending_geofence_center_.reset();
  }

  void merge_executed_prefix() {
    if (!follower_) return;
    std::vector<Vec3> pts = follower_->executed_prefix();
    pts.push_back(follower_->current_pose().position);
    merge_positions(pts);
  }

  void merge_executed_full() {
    if (!follower_) return;
    global_.merge_executed(path_origin_vertex_, follower_->path(), map_,
                           cfg_.robot.box_half);
  }

  void merge_positions(const std::vector<Vec3>& pts) {
    if (pts.size() < 2) return;
    PlannedPath chain;
    for (const Vec3& p : pts)
      chain.vertices.push_back(
          {RobotConfig(p, pose_true_.heading, cfg_.robot.box_half), -1});
    chain.length = chain.compute_length();
    global_.merge_executed(path_origin_vertex_, chain, map_,
                           cfg_.robot.box_half);
  }

  void sense_phase() {
    Scan scan = simulate_scan(pose_true_, cfg_.sensor, world_.free_boxes,
                              cfg_.range_noise_sigma, &scan_rng_);
    scan.origin += noise_.offset();
    map_.integrate_scan(scan);
    noise_.step(cfg_.dt);
  }

  void artifact_phase(double now) {
    const auto detections =
        simulate_detections(pose_true_, reported(), cfg_.camera,
                            world_.artifacts, map_, cfg_.detection, now,
                            detect_rng_);
    for (const Detection& det : detections) {
      const auto point =
          bbox_to_point(det, map_, cfg_.bbox_grid_rows, cfg_.bbox_grid_cols);
      if (!point) continue;  // no mapped surface behind the box yet
      const int id = hypotheses_.associate_and_update(*point, det.cls, det);
      if (auto report = hypotheses_.confirm_and_freeze(id)) {
        event("artifact_confirmed",
              {{"hypothesis", id},
               {"class", artifact_class_name(report->cls)},
               {"position",
                {report->position.x(), report->position.y(),
                 report->position.z()}}});
        const bool ok = score_report(*report, world_.artifacts, consumed_);
        score_ += ok ? 1 : 0;
        log_.reports.push_back(*report);
        event("artifact_reported",
              {{"hypothesis", id},
               {"class", artifact_class_name(report->cls)},
               {"position",
                {report->position.x(), report->position.y(),
                 report->position.z()}},
               {"scored", ok}});
      }
    }
  }

  void budget_phase(double now) {
    if (!follower_) return;
    const double back_to_origin = follower_->progress();
    const double origin_home = global_.distance_to_home(path_origin_vertex_);
    if (!std::isfinite(origin_home)) return;
    const double est_time = (back_to_origin + origin_home) / cfg_.robot.v_ref;
    if (cfg_.time_limit_s - now - est_time <= cfg_.safety_margin_s)
      trigger_homing(now, "budget", /*mid_path=*/true);
  }

  void trigger_homing(double now, const std::string& reason, bool mid_path) {
    if (mid_path) merge_executed_prefix();
    // Repositioning may not jump straight to homing; pass through explore.
    if (mode_ == MissionMode::kReposition) transition(MissionMode::kExplore);
    const int cur = global_.attach_config(reported(), map_);
    event("homing_triggered", {{"reason", reason}});
    PlannedPath home = global_.homing_path(cur);
    if (home.vertices.size() < 2) {
      // Already at home.
      event("mission_complete", {{"t_home", now}});
      log_.summary.t_home = now;
      follower_.reset();
      transition(MissionMode::kHome);
      transition(MissionMode::kTerminated);
      return;
    }
    issue_path(std::move(home), PathKind::kHoming, cur);
    transition(MissionMode::kHome);
  }

  void plan_phase(double now) {
    const auto wall_start = std::chrono::steady_clock::now();
    const RobotConfig root = reported();
    const int cur = global_.attach_config(root, map_);
    global_.reevaluate_frontiers(map_, cfg_.sensor, cfg_.gain.gain_threshold,
                                 now);

    // Budget comes first: no new exploration is started if the remaining
    // time only covers the trip home plus the margin.
    const double d_home = global_.distance_to_home(cur);
    if (std::isfinite(d_home) &&
        cfg_.time_limit_s - now - d_home / cfg_.robot.v_ref <=
            cfg_.safety_margin_s) {
      trigger_homing(now, "budget", /*mid_path=*/false);
      record_plan_time(wall_start);
      return;
    }

    LocalPlannerParams lp = cfg_.local;
    lp.bound.center = root.position;
    GainParams gp = cfg_.gain;
    gp.exploration_dir = exploration_direction(root.position);
    HeadingParams hp{cfg_.robot.v_ref, cfg_.robot.yaw_rate_max,
                     cfg_.robot.robot_class};

    const LocalPlanResult result =
        plan_local(map_, root, cfg_.sensor, lp, gp, hp, sample_rng_);

    if (result.status == LocalPlanStatus::kDegenerateRoot) {
      event("degenerate_root", {});
      ++recovery_attempts_;
      if (recovery_attempts_ > 3) {
        event("mission_aborted", {{"reason", "degenerate_root"}});
        log_.summary.aborted = true;
        transition(MissionMode::kTerminated);
      } else {
        start_trail_recovery();
      }
      record_plan_time(wall_start);
      return;
    }
    recovery_attempts_ = 0;
    root_history_.push_back(root.position);

    // Frontier bookkeeping happens on every local iteration.
    auto candidates = extract_frontiers(result, cfg_.gain.gain_threshold);
    candidates = global_.dedup_candidates(candidates);
    const auto principals = cluster_and_select_principal(
        candidates, cfg_.dtw_threshold, cfg_.gain.resample_spacing);
    global_.merge_principals(cur, principals, map_, cfg_.robot.box_half, now);

    if (result.status == LocalPlanStatus::kBestPath) {
      issue_path(result.best, PathKind::kLocal, cur);
      transition(MissionMode::kExecute);
      record_plan_time(wall_start);
      return;
    }

    event("local_completion", {});
    const auto selected = global_.select_frontier(cur, cfg_.budget(now));
    if (selected) {
      event("frontier_selected",
            {{"vertex", selected->frontier.vertex_id},
             {"score", selected->score},
             {"position",
              {selected->path.terminal_position().x(),
               selected->path.terminal_position().y(),
               selected->path.terminal_position().z()}}});
      issue_path(selected->path, PathKind::kGlobal, cur);
      transition(MissionMode::kReposition);
    } else {
      trigger_homing(now, "global_completion", /*mid_path=*/false);
    }
    record_plan_time(wall_start);
  }

  Vec3 exploration_direction(const Vec3& cur) const {
    const std::size_t h = static_cast<std::size_t>(cfg_.exploration_history);
    if (root_history_.size() < h) return Vec3::Zero();
    const Vec3 ref = root_history_[root_history_.size() - h];
    const Vec3 d = cur - ref;
    if (d.norm() < 1e-6) return Vec3::Zero();
    return d.normalized();
  }

  void start_trail_recovery() {
    // Back away along the recently traversed trail and try planning again.
    std::vector<Vec3> pts;
    pts.push_back(reported().position);
    double acc = 0.0;
    for (auto it = trail_.rbegin(); it != trail_.rend(); ++it) {
      if ((*it - pts.back()).norm() < 1e-9) continue;
      acc += (*it - pts.back()).norm();
      pts.push_back(*it);
      if (acc >= cfg_.robot.reverse_distance) break;
    }
    if (pts.size() < 2) {
      event("mission_aborted", {{"reason", "degenerate_root_no_trail"}});
      log_.summary.aborted = true;
      transition(MissionMode::kTerminated);
      return;
    }
    PlannedPath back;
    for (const Vec3& p : pts)
      back.vertices.push_back(
          {RobotConfig(p, pose_true_.heading, cfg_.robot.box_half), -1});
    back.length = back.compute_length();
    follower_ = PathFollower(std::move(back), cfg_.robot.robot_class);
    merge_on_complete_ = false;  // backtrack over already-merged ground
    transition(MissionMode::kExecute);
  }

  void record_plan_time(std::chrono::steady_clock::time_point start) {
    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
    plan_wall_ms_.push_back(ms);
  }

  void finalize_summary() {
    MissionSummary& s = log_.summary;
    s.explored_fraction = voxplan::explored_fraction(map_, world_);
    const auto mask = explorable_mask(map_, world_);
    s.explorable_voxels = 0;
    s.known_explorable_voxels = 0;
    const Vec3i dims = map_.extents();
    Vec3i v;
    for (v.z() = 0; v.z() < dims.z(); ++v.z())
      for (v.y() = 0; v.y() < dims.y(); ++v.y())
        for (v.x() = 0; v.x() < dims.x(); ++v.x()) {
          if (!mask[map_.flat_index(v)]) continue;
          ++s.explorable_voxels;
          if (map_.state(v) != VoxelState::kUnknown)
            ++s.known_explorable_voxels;
        }
    s.score = score_;
    s.reports = static_cast<int>(log_.reports.size());
    s.distance_m = distance_;
    s.t_end = t();
    s.return_home_success =
        s.t_home >= 0.0 && s.t_home <= cfg_.time_limit_s &&
        (pose_true_.position - world_.home).norm() <= 0.75;
    s.planning_iterations = static_cast<int>(plan_wall_ms_.size());
    double total = 0.0, peak = 0.0;
    for (double ms : plan_wall_ms_) {
      total += ms;
      peak = std::max(peak, ms);
    }
    s.planning_wall_ms_mean =
        plan_wall_ms_.empty() ? 0.0 : total / plan_wall_ms_.size();
    s.planning_wall_ms_max = peak;
    s.seed = cfg_.seed;
  }

  MissionConfig cfg_;
  World world_;
  VoxelMap map_;
  GlobalGraph global_;
  HypothesisStore hypotheses_;
  LocalizationNoise noise_;
  std::mt19937_64 sample_rng_;
  std::mt19937_64 scan_rng_;
  std::mt19937_64 detect_rng_;

  RobotConfig pose_true_;
  MissionMode mode_ = MissionMode::kExplore;
  std::size_t tick_ = 0;
  double distance_ = 0.0;
  int score_ = 0;
  std::vector<bool> consumed_;

  std::optional<PathFollower> follower_;
  int path_origin_vertex_ = 0;
  bool merge_on_complete_ = true;
  double reverse_remaining_ = 0.0;
  std::optional<Vec3> pending_geofence_center_;
  int stall_ticks_ = 0;
  int recovery_attempts_ = 0;
  std::deque<Vec3> root_history_;
  std::vector<Vec3> trail_;
  std::vector<double> plan_wall_ms_;
  MissionLog log_;
};

inline constexpr double kLogChunkSeconds = 300.0;  // flush cadence, sim time

/// Per-tick metrics, one CSV row per tick. Output is byte-stable for a fixed
/// seed: fixed-precision numeric formatting, no wall-clock content.
inline void write_metrics_csv(const MissionLog& log, const std::string& path) {
  std::ofstream os(path);
  os << "t,x,y,z,psi,rx,ry,rz,rpsi,mode,known_voxels,distance\n";
  char buf[320];
  double next_flush = kLogChunkSeconds;
  for (const TickRecord& r : log.ticks) {
    std::snprintf(buf, sizeof(buf),
                  "%.3f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%s,%zu,%.6f\n",
                  r.t, r.true_pose.position.x(), r.true_pose.position.y(),
                  r.true_pose.position.z(), r.true_pose.heading,
                  r.reported_pose.position.x(), r.reported_pose.position.y(),
                  r.reported_pose.position.z(), r.reported_pose.heading,
                  mission_mode_name(r.mode), r.known_voxels, r.distance);
    os << buf;
    if (r.t >= next_flush) {
      os.flush();
      next_flush += kLogChunkSeconds;
    }
  }
}

inline void write_events_jsonl(const MissionLog& log, const std::string& path) {
  std::ofstream os(path);
  double next_flush = kLogChunkSeconds;
  for (const nlohmann::json& e : log.events) {
    os << e.dump() << "\n";
    const double t = e.value("t", 0.0);
    if (t >= next_flush) {
      os.flush();
      next_flush += kLogChunkSeconds;
    }
  }
}

inline void write_reports_jsonl(const MissionLog& log,
                                const std::string& path) {
  std::ofstream os(path);
  for (const Report& r : log.reports) {
    nlohmann::json j{{"class", artifact_class_name(r.cls)},
                     {"position", {r.position.x(), r.position.y(),
                                   r.position.z()}},
                     {"hypothesis", r.hypothesis_id},
                     {"scored", r.scored.value_or(false)}};
    os << j.dump() << "\n";
  }
}

inline void write_summary_json(const MissionLog& log, const std::string& path) {
  const MissionSummary& s = log.summary;
  nlohmann::json j{
      {"explored_fraction", s.explored_fraction},
      {"explorable_voxels", s.explorable_voxels},
      {"known_explorable_voxels", s.known_explorable_voxels},
      {"score", s.score},
      {"reports", s.reports},
      {"distance_m", s.distance_m},
      {"return_home_success", s.return_home_success},
      {"aborted", s.aborted},
      {"t_end", s.t_end},
      {"t_home", s.t_home},
      {"planning_iterations", s.planning_iterations},
      {"planning_wall_ms_mean", s.planning_wall_ms_mean},
      {"planning_wall_ms_max", s.planning_wall_ms_max},
      {"seed", s.seed}};
  std::ofstream os(path);
  os << j.dump(2) << "\n";
}

inline void write_global_graph_json(const GlobalGraph& global,
                                    const std::string& path) {
  nlohmann::json vertices = nlohmann::json::array();
  for (const GraphVertex& v : global.graph().vertices()) {
    vertices.push_back({{"id", v.id},
                        {"position", {v.config.position.x(),
                                      v.config.position.y(),
                                      v.config.position.z()}},
                        {"heading", v.config.heading},
                        {"frontier", v.frontier},
                        {"gain", v.gain}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const GraphEdge& e : global.graph().edges())
    edges.push_back({{"a", e.a}, {"b", e.b}, {"length", e.length}});
  nlohmann::json j{{"vertices", vertices}, {"edges", edges}};
  std::ofstream os(path);
  os << j.dump(2) << "\n";
}

}  // namespace voxplan

#endif  // VOXPLAN_MISSION_HPP
