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

#ifndef VOXPLAN_GLOBAL_PLANNER_HPP
#define VOXPLAN_GLOBAL_PLANNER_HPP

#include <algorithm>
#include <functional>
#include <numeric>
#include <optional>
#include <vector>

#include "voxplan/dtw.hpp"
#include "voxplan/graph.hpp"
#include "voxplan/local_planner.hpp"
#include "voxplan/sensor.hpp"
#include "voxplan/voxel_map.hpp"

namespace voxplan {

/// Mission time accounting used by the global gain. Travel time between
/// graph vertices is estimated as shortest-path length over v_ref.
struct TimeBudget {
  double remaining_s = 600.0;   // T_e(t)
  double v_ref = 1.0;           // m/s
  double epsilon_d = 0.02;      // 1/m, distance penalty weight
  double safety_margin_s = 30.0;
};

/// A local vertex that qualified as a frontier, with its root path.
struct FrontierCandidate {
  int vertex_id = -1;
  PlannedPath path;
  double gain = 0.0;
  double bonus = 0.0;
};

/// Every vertex whose gain exceeds the threshold, paired with its shortest
/// path from the local root.
inline std::vector<FrontierCandidate> extract_frontiers(
    const LocalPlanResult& local, double gain_threshold) {
  std::vector<FrontierCandidate> out;
  for (const PlannedPath& p : local.paths) {
    const int id = p.terminal_id();
    if (local.gains.total[id] > gain_threshold)
      out.push_back({id, p, local.gains.total[id], local.gains.bonus[id]});
  }
  return out;
}

/// Remaining exploration time if the robot visits `target` and then returns
/// home: T_e - travel(cur, target) - travel(target, home). Unreachable
/// targets yield nullopt.
inline std::optional<double> remaining_time(const ExplorationGraph& g, int cur,
                                            int target, int home,
                                            const TimeBudget& budget) {
  const auto from_cur = dijkstra(g, cur);
  const auto from_target = dijkstra(g, target);
  if (!from_cur.reachable(target) || !from_target.reachable(home))
    return std::nullopt;
  return budget.remaining_s -
         from_cur.dist[target] / budget.v_ref -
         from_target.dist[home] / budget.v_ref;
}

/// Global exploration gain of a frontier: remaining time after the visit,
/// weighted by the frontier's volume gain and a distance penalty.
inline double global_gain(double remaining_time_s, double frontier_gain,
                          double dist_to_frontier, double epsilon_d) {
  return remaining_time_s * frontier_gain *
         std::exp(-epsilon_d * dist_to_frontier);
}

struct Frontier {
  int vertex_id = -1;
  double gain = 0.0;   // volume gain + any carried level-change bonus
  double bonus = 0.0;
  double last_eval_time = 0.0;
};

struct SelectedFrontier {
  Frontier frontier;
  double score = 0.0;           // global exploration gain
  double time_after_visit = 0.0;
  PlannedPath path;             // current vertex -> frontier
};

/// Sparse mission-wide graph rooted at the home configuration. Frontier
/// vertices are kept at least `frontier_radius` apart, and by construction
/// every vertex stays connected to home.
class GlobalGraph {
 public:
  GlobalGraph(const RobotConfig& home, double edge_radius,
              double frontier_radius)
      : graph_(home),
        edge_radius_(edge_radius),
        frontier_radius_(frontier_radius) {}

  const ExplorationGraph& graph() const { return graph_; }
  int home_id() const { return 0; }
  const std::vector<Frontier>& frontiers() const { return frontiers_; }

  int nearest_vertex(const Vec3& p) const {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int id = 0; id < graph_.size(); ++id) {
      const double d = (graph_.vertex(id).config.position - p).norm();
      if (d < best_d) {
        best_d = d;
        best = id;
      }
    }
    return best;
  }

  /// Inserts the configuration as a graph vertex connected to its admissible
  /// neighbors, reusing any vertex closer than the reuse radius. Falls back
  /// to the nearest existing vertex when no admissible connection exists, so
  /// home reachability is never broken.
  int attach_config(const RobotConfig& cfg, const VoxelMap& map,
                    double reuse_radius = 0.05) {
    const int nearest = nearest_vertex(cfg.position);
    if ((graph_.vertex(nearest).config.position - cfg.position).norm() <=
        reuse_radius)
      return nearest;
    std::vector<std::pair<int, double>> links = admissible_links(cfg, map);
    if (links.empty()) return nearest;
    const int id = graph_.add_vertex(cfg);
    for (const auto& [v, len] : links) graph_.add_edge(v, id, len);
    return id;
  }

  /// Removes candidates within the frontier radius of an existing global
  /// frontier.
  std::vector<FrontierCandidate> dedup_candidates(
      const std::vector<FrontierCandidate>& candidates) const {
    std::vector<FrontierCandidate> out;
    for (const FrontierCandidate& c : candidates) {
      bool close = false;
      for (const Frontier& f : frontiers_) {
        if ((graph_.vertex(f.vertex_id).config.position -
             c.path.terminal_position())
                .norm() < frontier_radius_) {
          close = true;
          break;
        }
      }
      if (!close) out.push_back(c);
    }
    return out;
  }

  /// Appends principal paths starting at the current vertex, wiring each new
  /// vertex to the previous one and to nearby global vertices when the
  /// connecting segment is admissible. Terminals become frontiers unless one
  /// already sits within the frontier radius.
  void merge_principals(int cur_id, const std::vector<FrontierCandidate>& principals,
                        const VoxelMap& map, const Vec3& robot_half, double t) {
    for (const FrontierCandidate& c : principals) {
      const int terminal = merge_chain(cur_id, c.path, map, robot_half);
      if (terminal < 0) continue;
      if (frontier_separation_ok(terminal)) {
        graph_.vertex(terminal).frontier = true;
        graph_.vertex(terminal).gain = c.gain;
        frontiers_.push_back({terminal, c.gain, c.bonus, t});
      }
    }
  }

  /// Records a path the robot actually traversed so later homing and
  /// reposition queries can route along it.
  void merge_executed(int start_id, const PlannedPath& path, const VoxelMap& map,
                      const Vec3& robot_half) {
    merge_chain(start_id, path, map, robot_half);
  }

  /// Recomputes every frontier's volume gain on the latest snapshot and
  /// drops the ones at or below the threshold.
  void reevaluate_frontiers(const VoxelMap& map, const SensorFrustum& frustum,
                            double gain_threshold, double t) {
    std::vector<Frontier> kept;
    for (Frontier f : frontiers_) {
      const RobotConfig& cfg = graph_.vertex(f.vertex_id).config;
      f.gain = volume_gain(cfg, frustum, map) + f.bonus;
      f.last_eval_time = t;
      graph_.vertex(f.vertex_id).gain = f.gain;
      if (f.gain > gain_threshold) {
        kept.push_back(f);
      } else {
        graph_.vertex(f.vertex_id).frontier = false;
      }
    }
    frontiers_ = std::move(kept);
  }

  std::optional<double> time_after_visit(int cur_id, int frontier_id,
                                         const TimeBudget& budget) const {
    return remaining_time(graph_, cur_id, frontier_id, home_id(), budget);
  }

  /// Argmax of the global gain over frontiers with positive remaining time.
  /// Ties prefer the larger stored gain, then the lower vertex id.
  std::optional<SelectedFrontier> select_frontier(
      int cur_id, const TimeBudget& budget) const {
    const auto from_cur = dijkstra(graph_, cur_id);
    const auto from_home = dijkstra(graph_, home_id());
    std::optional<SelectedFrontier> best;
    for (const Frontier& f : frontiers_) {
      if (!from_cur.reachable(f.vertex_id) || !from_home.reachable(f.vertex_id))
        continue;
      const double travel =
          (from_cur.dist[f.vertex_id] + from_home.dist[f.vertex_id]) /
          budget.v_ref;
      const double time_left = budget.remaining_s - travel;
      if (time_left <= 0.0) continue;
      const double score = global_gain(time_left, f.gain,
                                       from_cur.dist[f.vertex_id],
                                       budget.epsilon_d);
      const bool better =
          !best || score > best->score ||
          (score == best->score &&
           (f.gain > best->frontier.gain ||
            (f.gain == best->frontier.gain &&
             f.vertex_id < best->frontier.vertex_id)));
      if (better) {
        SelectedFrontier sel;
        sel.frontier = f;
        sel.score = score;
        sel.time_after_visit = time_left;
        sel.path = make_path(graph_, tree_path(from_cur, f.vertex_id),
                             from_cur.dist[f.vertex_id], PathKind::kGlobal);
        best = sel;
      }
    }
    return best;
  }

  /// Shortest return-to-home path from a graph vertex; zero length when the
  /// robot is already home.
  PlannedPath homing_path(int cur_id) const {
    const auto tree = dijkstra(graph_, cur_id);
    return make_path(graph_, tree_path(tree, home_id()), tree.dist[home_id()],
                     PathKind::kHoming);
  }

  double distance_to_home(int cur_id) const {
    const auto tree = dijkstra(graph_, cur_id);
    return tree.dist[home_id()];
  }

 private:
  std::vector<std::pair<int, double>> admissible_links(
      const RobotConfig& cfg, const VoxelMap& map) const {
    std::vector<std::pair<int, double>> links;
    std::vector<int> order(graph_.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const double da = (graph_.vertex(a).config.position - cfg.position).norm();
      const double db = (graph_.vertex(b).config.position - cfg.position).norm();
      return da < db || (da == db && a < b);
    });
    for (int v : order) {
      const double len = (graph_.vertex(v).config.position - cfg.position).norm();
      if (len > edge_radius_ && !links.empty()) break;
      if (map.segment_admissible(graph_.vertex(v).config.position, cfg.position,
                                 cfg.box_half)) {
        links.emplace_back(v, len);
        if (len > edge_radius_) break;  // distant fallback link only
      }
    }
    return links;
  }

  bool has_edge(int a, int b) const {
    for (const auto& [v, _] : graph_.neighbors(a))
      if (v == b) return true;
    return false;
  }

  bool frontier_separation_ok(int vertex_id) const {
    const Vec3& p = graph_.vertex(vertex_id).config.position;
    for (const Frontier& f : frontiers_) {
      if ((graph_.vertex(f.vertex_id).config.position - p).norm() <
          frontier_radius_)
        return false;
    }
    return true;
  }

  // Walks the path from the vertex `start_id`, appending missing vertices
  // and edges; returns the graph id of the path terminal.
  int merge_chain(int start_id, const PlannedPath& path, const VoxelMap& map,
                  const Vec3& robot_half) {
    if (path.empty()) return -1;
    int prev = start_id;
    for (std::size_t i = 1; i < path.vertices.size(); ++i) {
      const RobotConfig& cfg = path.vertices[i].config;
      const int nearest = nearest_vertex(cfg.position);
      int cur;
      if ((graph_.vertex(nearest).config.position - cfg.position).norm() <=
          1e-6) {
        cur = nearest;
      } else {
        cur = graph_.add_vertex(cfg);
        for (int v = 0; v + 1 < graph_.size(); ++v) {
          if (v == prev) continue;
          const double len =
              (graph_.vertex(v).config.position - cfg.position).norm();
          if (len <= edge_radius_ &&
              map.segment_admissible(graph_.vertex(v).config.position,
                                     cfg.position, robot_half))
            graph_.add_edge(v, cur, len);
        }
      }
      if (cur != prev && !has_edge(prev, cur)) {
        const double len = (graph_.vertex(cur).config.position -
                            graph_.vertex(prev).config.position)
                               .norm();
        graph_.add_edge(prev, cur, len);
      }
      prev = cur;
    }
    return prev;
  }

  ExplorationGraph graph_;
  std::vector<Frontier> frontiers_;
  double edge_radius_;
  double frontier_radius_;
};

/// Single-linkage clustering of candidate paths under the DTW similarity;
/// each cluster keeps its longest path (ties: lower terminal vertex id).
inline std::vector<FrontierCandidate> cluster_and_select_principal(
    const std::vector<FrontierCandidate>& candidates, double dtw_threshold,
    double resample_spacing = 0.5) {
  const int n = static_cast<int>(candidates.size());
  if (n <= 1) return candidates;
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<std::vector<Vec3>> resampled(n);
  for (int i = 0; i < n; ++i)
    resampled[i] =
        resample_polyline(candidates[i].path.positions(), resample_spacing);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (dtw_distance(resampled[i], resampled[j]) <= dtw_threshold)
        parent[find(i)] = find(j);

  std::vector<FrontierCandidate> principals;
  std::vector<int> cluster_best(n, -1);
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    int& best = cluster_best[r];
    if (best < 0) {
      best = i;
      continue;
    }
    const PlannedPath& a = candidates[i].path;
    const PlannedPath& b = candidates[best].path;
    if (a.length > b.length ||
        (a.length == b.length && a.terminal_id() < b.terminal_id()))
      best = i;
  }
  for (int i = 0; i < n; ++i)
    if (cluster_best[i] >= 0) principals.push_back(candidates[cluster_best[i]]);
  return principals;
}

}  // namespace voxplan

#endif  // VOXPLAN_GLOBAL_PLANNER_HPP
