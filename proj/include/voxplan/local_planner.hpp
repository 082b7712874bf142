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

#ifndef VOXPLAN_LOCAL_PLANNER_HPP
#define VOXPLAN_LOCAL_PLANNER_HPP

#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "voxplan/dtw.hpp"
#include "voxplan/graph.hpp"
#include "voxplan/sensor.hpp"
#include "voxplan/voxel_map.hpp"

namespace voxplan {

enum class SamplingMode { kHorizontal, kVertical };

/// Weights of the local exploration gain: a path's gain is
///   exp(-zeta * Z) * sum_j gain(v_j) * exp(-delta_gain * D(root, v_j))
/// where Z is the similarity distance between the path and a straight path
/// of equal length along the estimated exploration direction.
struct GainParams {
  double zeta = 0.3;
  double delta_gain = 0.15;          // 1/m
  Vec3 exploration_dir = Vec3::Zero();  // zero disables the Z term
  double gain_threshold = 30.0;      // voxels
  double resample_spacing = 0.5;     // m, for the DTW similarity
};

struct LocalPlannerParams {
  LocalBound bound;
  int n_samples = 300;
  double edge_radius = 1.0;  // m
  SamplingMode mode = SamplingMode::kHorizontal;
  double vertical_floor_height = 2.5;  // m
  double vertical_gain_bonus = 200.0;  // voxels
};

struct HeadingParams {
  double v_ref = 1.0;          // m/s
  double yaw_rate_max = 1.5;   // rad/s, aerial only
  RobotClass robot_class = RobotClass::kAerial;
};

/// Builds the random local graph around the root. Samples are drawn inside
/// the bound, kept when the robot box fits in known-free space, and wired to
/// every earlier vertex within the connection radius whose segment is
/// admissible. Vertices unreachable from the root are dropped. Returns
/// nullopt when the root placement itself is inadmissible (degenerate root).
inline std::optional<ExplorationGraph> build_local_graph(
    const VoxelMap& map, const RobotConfig& root, const LocalPlannerParams& p,
    std::mt19937_64& rng) {
  if (!map.position_admissible(root.position, root.box_half))
    return std::nullopt;

  ExplorationGraph g(root);
  const Aabb region = p.bound.aabb().clamped_to(map.bounds());
  if (region.empty()) return g;

  std::uniform_real_distribution<double> ux(region.min.x(), region.max.x());
  std::uniform_real_distribution<double> uy(region.min.y(), region.max.y());
  std::uniform_real_distribution<double> uz(region.min.z(), region.max.z());
  std::normal_distribution<double> gx(root.position.x(),
                                      p.bound.dimensions.x() / 4.0);
  std::normal_distribution<double> gy(root.position.y(),
                                      p.bound.dimensions.y() / 4.0);

  for (int i = 0; i < p.n_samples; ++i) {
    Vec3 sample;
    if (p.mode == SamplingMode::kVertical) {
      sample = {gx(rng), gy(rng), uz(rng)};
      if (!region.contains(sample)) continue;
    } else {
      sample = {ux(rng), uy(rng), uz(rng)};
    }
    if (!map.position_admissible(sample, root.box_half)) continue;
    RobotConfig cfg(sample, root.heading, root.box_half);
    const int id = g.add_vertex(cfg);
    for (int j = 0; j < id; ++j) {
      const Vec3& other = g.vertex(j).config.position;
      const double len = (other - sample).norm();
      if (len > p.edge_radius) continue;
      if (map.segment_admissible(other, sample, root.box_half))
        g.add_edge(j, id, len);
    }
  }

  // Keep only the component reachable from the root, preserving vertex order.
  const auto tree = dijkstra(g, g.root());
  ExplorationGraph pruned;
  std::vector<int> remap(g.size(), -1);
  for (int id = 0; id < g.size(); ++id) {
    if (!tree.reachable(id)) continue;
    remap[id] = pruned.add_vertex(g.vertex(id).config);
  }
  for (const GraphEdge& e : g.edges()) {
    if (remap[e.a] >= 0 && remap[e.b] >= 0)
      pruned.add_edge(remap[e.a], remap[e.b], e.length);
  }
  return pruned;
}

/// Per-vertex VolumeGain, plus the vertical-mode level-change bonus. Bonuses
/// are returned separately so frontier bookkeeping can carry them forward.
struct VertexGains {
  std::vector<double> total;  // volume gain + bonus
  std::vector<double> bonus;
};

inline VertexGains compute_vertex_gains(const ExplorationGraph& g,
                                        const VoxelMap& map,
                                        const SensorFrustum& frustum,
                                        const LocalPlannerParams& p) {
  VertexGains out;
  out.total.resize(g.size());
  out.bonus.assign(g.size(), 0.0);
  const double root_z = g.vertex(g.root()).config.position.z();
  for (int id = 0; id < g.size(); ++id) {
    const RobotConfig& cfg = g.vertex(id).config;
    double gain = volume_gain(cfg, frustum, map);
    if (p.mode == SamplingMode::kVertical &&
        std::abs(cfg.position.z() - root_z) > p.vertical_floor_height) {
      out.bonus[id] = p.vertical_gain_bonus;
      gain += p.vertical_gain_bonus;
    }
    out.total[id] = gain;
  }
  return out;
}

/// Exploration gain of a path from per-vertex gains (the root vertex is
/// included with distance weight 1).
inline double path_gain(const PlannedPath& path,
                        const std::vector<double>& vertex_gain,
                        const GainParams& gp) {
  if (path.empty()) return 0.0;
  double sum = 0.0;
  double dist = 0.0;
  for (std::size_t j = 0; j < path.vertices.size(); ++j) {
    if (j > 0)
      dist += (path.vertices[j].config.position -
               path.vertices[j - 1].config.position)
                  .norm();
    sum += vertex_gain[path.vertices[j].graph_id] *
           std::exp(-gp.delta_gain * dist);
  }
  double z = 0.0;
  if (gp.exploration_dir.norm() > 1e-9) {
    const Vec3 root = path.vertices.front().config.position;
    const Vec3 dir = gp.exploration_dir.normalized();
    const std::vector<Vec3> straight = {root, root + path.compute_length() * dir};
    z = path_similarity(path.positions(), straight, gp.resample_spacing);
  }
  return std::exp(-gp.zeta * z) * sum;
}

/// Convenience overload that evaluates VolumeGain per path vertex directly.
inline double path_gain(const PlannedPath& path, const VoxelMap& map,
                        const SensorFrustum& frustum, const GainParams& gp) {
  if (path.empty()) return 0.0;
  std::vector<double> gains(path.vertices.size());
  PlannedPath reindexed = path;
  for (std::size_t j = 0; j < path.vertices.size(); ++j) {
    gains[j] = volume_gain(path.vertices[j].config, frustum, map);
    reindexed.vertices[j].graph_id = static_cast<int>(j);
  }
  return path_gain(reindexed, gains, gp);
}

/// Assigns per-vertex headings. Legged robots turn in place, so every vertex
/// faces its outgoing segment; aerial headings chase the segment direction
/// but the change per segment is clipped by the yaw-rate budget
/// yaw_rate_max * segment_length / v_ref.
inline void assign_headings(PlannedPath& path, const HeadingParams& hp) {
  if (path.vertices.size() < 2) return;
  auto segment_yaw = [&](std::size_t i, double fallback) {
    const Vec3 d = path.vertices[i + 1].config.position -
                   path.vertices[i].config.position;
    if (std::hypot(d.x(), d.y()) < 1e-9) return fallback;
    return std::atan2(d.y(), d.x());
  };
  if (hp.robot_class == RobotClass::kLegged) {
    double last = path.vertices.front().config.heading;
    for (std::size_t i = 0; i + 1 < path.vertices.size(); ++i) {
      last = segment_yaw(i, last);
      path.vertices[i].config.heading = last;
    }
    path.vertices.back().config.heading = last;
    return;
  }
  double psi = path.vertices.front().config.heading;
  for (std::size_t i = 1; i < path.vertices.size(); ++i) {
    const double seg_len = (path.vertices[i].config.position -
                            path.vertices[i - 1].config.position)
                               .norm();
    const double budget = hp.yaw_rate_max * seg_len / hp.v_ref;
    const double desired = segment_yaw(i - 1, psi);
    const double delta = wrap_angle(desired - psi);
    psi = wrap_angle(psi + std::clamp(delta, -budget, budget));
    path.vertices[i].config.heading = psi;
  }
}

enum class LocalPlanStatus { kBestPath, kLocalCompletion, kDegenerateRoot };

struct LocalPlanResult {
  LocalPlanStatus status = LocalPlanStatus::kLocalCompletion;
  PlannedPath best;
  ExplorationGraph graph;
  std::vector<PlannedPath> paths;   // Dijkstra path per reachable vertex
  VertexGains gains;
};

/// Deterministic argmax over candidate paths: highest gain, then shorter
/// length, then lower terminal vertex id.
inline int select_best_path(const std::vector<PlannedPath>& paths) {
  int best = -1;
  for (int i = 0; i < static_cast<int>(paths.size()); ++i) {
    if (best < 0) {
      best = i;
      continue;
    }
    const PlannedPath& a = paths[i];
    const PlannedPath& b = paths[best];
    if (a.gain > b.gain ||
        (a.gain == b.gain &&
         (a.length < b.length ||
          (a.length == b.length && a.terminal_id() < b.terminal_id()))))
      best = i;
  }
  return best;
}

/// One local planning iteration: build the graph, score every shortest path
/// with the exploration gain, and either return the best path (gain at or
/// above the threshold) or report local completion.
inline LocalPlanResult plan_local(const VoxelMap& map, const RobotConfig& root,
                                  const SensorFrustum& frustum,
                                  const LocalPlannerParams& lp,
                                  const GainParams& gp,
                                  const HeadingParams& hp,
                                  std::mt19937_64& rng) {
  LocalPlanResult result;
  auto graph = build_local_graph(map, root, lp, rng);
  if (!graph) {
    result.status = LocalPlanStatus::kDegenerateRoot;
    return result;
  }
  result.graph = std::move(*graph);
  result.gains = compute_vertex_gains(result.graph, map, frustum, lp);
  result.paths = shortest_paths(result.graph);
  for (PlannedPath& p : result.paths)
    p.gain = path_gain(p, result.gains.total, gp);

  const int best = select_best_path(result.paths);
  if (best < 0 || result.paths[best].gain < gp.gain_threshold) {
    result.status = LocalPlanStatus::kLocalCompletion;
    return result;
  }
  result.status = LocalPlanStatus::kBestPath;
  result.best = result.paths[best];
  assign_headings(result.best, hp);
  return result;
}

}  // namespace voxplan

#endif  // VOXPLAN_LOCAL_PLANNER_HPP
