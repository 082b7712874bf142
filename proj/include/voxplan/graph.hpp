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

#ifndef VOXPLAN_GRAPH_HPP
#define VOXPLAN_GRAPH_HPP

#include <limits>
#include <queue>
#include <tuple>
#include <vector>

#include "voxplan/voxel_map.hpp"

namespace voxplan {

struct GraphVertex {
  int id = 0;
  RobotConfig config;
  double gain = 0.0;
  bool frontier = false;
};

struct GraphEdge {
  int a = 0;
  int b = 0;
  double length = 0.0;
};

/// Undirected graph of robot configurations with Euclidean edge lengths.
class ExplorationGraph {
 public:
  ExplorationGraph() = default;
  explicit ExplorationGraph(const RobotConfig& root) { add_vertex(root); }

  int add_vertex(const RobotConfig& config) {
    const int id = static_cast<int>(vertices_.size());
    vertices_.push_back({id, config, 0.0, false});
    adj_.emplace_back();
    return id;
  }

  void add_edge(int a, int b, double length) {
    edges_.push_back({a, b, length});
    adj_[a].emplace_back(b, length);
    adj_[b].emplace_back(a, length);
  }

  int size() const { return static_cast<int>(vertices_.size()); }
  bool empty() const { return vertices_.empty(); }
  int root() const { return 0; }

  const GraphVertex& vertex(int id) const { return vertices_[id]; }
  GraphVertex& vertex(int id) { return vertices_[id]; }
  const std::vector<GraphVertex>& vertices() const { return vertices_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }
  const std::vector<std::pair<int, double>>& neighbors(int id) const {
    return adj_[id];
  }

 private:
  std::vector<GraphVertex> vertices_;
  std::vector<GraphEdge> edges_;
  std::vector<std::vector<std::pair<int, double>>> adj_;
};

struct ShortestPathTree {
  std::vector<double> dist;
  std::vector<int> parent;

  bool reachable(int id) const {
    return dist[id] < std::numeric_limits<double>::infinity();
  }
};

/// Dijkstra from `source`; ties pop in vertex-id order, so the tree is
/// deterministic for a fixed graph.
inline ShortestPathTree dijkstra(const ExplorationGraph& g, int source) {
  const int n = g.size();
  ShortestPathTree tree;
  tree.dist.assign(n, std::numeric_limits<double>::infinity());
  tree.parent.assign(n, -1);
  tree.dist[source] = 0.0;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> queue;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (d > tree.dist[u]) continue;
    for (const auto& [v, w] : g.neighbors(u)) {
      const double nd = d + w;
      if (nd < tree.dist[v]) {
        tree.dist[v] = nd;
        tree.parent[v] = u;
        queue.emplace(nd, v);
      }
    }
  }
  return tree;
}

inline std::vector<int> tree_path(const ShortestPathTree& tree, int target) {
  std::vector<int> ids;
  for (int v = target; v != -1; v = tree.parent[v]) ids.push_back(v);
  std::reverse(ids.begin(), ids.end());
  return ids;
}

enum class PathKind { kLocal, kGlobal, kHoming, kRefined };

inline const char* path_kind_name(PathKind k) {
  switch (k) {
    case PathKind::kLocal: return "local";
    case PathKind::kGlobal: return "global";
    case PathKind::kHoming: return "homing";
    default: return "refined";
  }
}

struct PathVertex {
  RobotConfig config;
  int graph_id = -1;
};

/// Ordered vertex sequence with headings, cumulative length and gain.
struct PlannedPath {
  std::vector<PathVertex> vertices;
  double length = 0.0;
  double gain = 0.0;
  PathKind kind = PathKind::kLocal;

  bool empty() const { return vertices.empty(); }
  int terminal_id() const {
    return vertices.empty() ? -1 : vertices.back().graph_id;
  }
  const Vec3& terminal_position() const {
    return vertices.back().config.position;
  }

  double compute_length() const {
    double d = 0.0;
    for (std::size_t i = 1; i < vertices.size(); ++i)
      d += (vertices[i].config.position - vertices[i - 1].config.position).norm();
    return d;
  }

  std::vector<Vec3> positions() const {
    std::vector<Vec3> out;
    out.reserve(vertices.size());
    for (const auto& v : vertices) out.push_back(v.config.position);
    return out;
  }
};

inline PlannedPath make_path(const ExplorationGraph& g,
                             const std::vector<int>& ids, double length,
                             PathKind kind) {
  PlannedPath p;
  p.kind = kind;
  p.length = length;
  p.vertices.reserve(ids.size());
  for (int id : ids) p.vertices.push_back({g.vertex(id).config, id});
  return p;
}

/// Shortest path from the root to every reachable non-root vertex, in vertex
/// id order. A singleton graph yields the empty set.
inline std::vector<PlannedPath> shortest_paths(const ExplorationGraph& g) {
  std::vector<PlannedPath> paths;
  if (g.empty()) return paths;
  const auto tree = dijkstra(g, g.root());
  for (int id = 0; id < g.size(); ++id) {
    if (id == g.root() || !tree.reachable(id)) continue;
    paths.push_back(make_path(g, tree_path(tree, id), tree.dist[id],
                              PathKind::kLocal));
  }
  return paths;
}

}  // namespace voxplan

#endif  // VOXPLAN_GRAPH_HPP
