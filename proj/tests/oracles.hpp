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
//
// Brute-force reference implementations used only by tests. None of these
// share code paths with the library routines they check: ray traversal is
// fine-step marching instead of grid stepping, shortest paths enumerate all
// simple paths, and visibility tests every voxel center directly.

#ifndef VOXPLAN_TESTS_ORACLES_HPP
#define VOXPLAN_TESTS_ORACLES_HPP

#include <algorithm>
#include <functional>
#include <optional>
#include <set>
#include <vector>

#include "voxplan/geometry.hpp"
#include "voxplan/graph.hpp"
#include "voxplan/sensor.hpp"
#include "voxplan/voxel_map.hpp"

namespace voxplan::oracle {

/// Voxels crossed by a segment, found by marching tiny steps and deduping
/// consecutive repeats. Independent of the Amanatides-Woo walk.
inline std::vector<Vec3i> march_ray_voxels(const VoxelMap& map,
                                           const Vec3& from, const Vec3& to,
                                           double step_frac = 0.02) {
  std::vector<Vec3i> out;
  const double len = (to - from).norm();
  const double step = map.resolution() * step_frac;
  const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
  for (int i = 0; i <= n; ++i) {
    const Vec3 p = from + (static_cast<double>(i) / n) * (to - from);
    const auto v = map.voxel_of(p);
    if (!v) continue;
    if (out.empty() || out.back() != *v) out.push_back(*v);
  }
  // Marching can revisit a voxel when skimming a face; dedupe globally but
  // keep first-visit order.
  std::vector<Vec3i> unique;
  for (const Vec3i& v : out) {
    bool seen = false;
    for (const Vec3i& u : unique)
      if (u == v) {
        seen = true;
        break;
      }
    if (!seen) unique.push_back(v);
  }
  return unique;
}

/// First occupied voxel along a ray and the marching distance to it.
struct RayHit {
  Vec3i voxel;
  double distance;
};

inline std::optional<RayHit> march_first_hit(const VoxelMap& map,
                                             const Vec3& from, const Vec3& dir,
                                             double max_range) {
  const double step = map.resolution() * 0.02;
  const int n = static_cast<int>(std::ceil(max_range / step));
  for (int i = 0; i <= n; ++i) {
    const double d = std::min(max_range, i * step);
    const auto v = map.voxel_of(from + d * dir);
    if (v && map.state(*v) == VoxelState::kOccupied) return RayHit{*v, d};
  }
  return std::nullopt;
}

/// Shortest-path distances from `source` by exhaustive enumeration of simple
/// paths. Exponential; for graphs of a dozen vertices only.
inline std::vector<double> enumerate_shortest(const ExplorationGraph& g,
                                              int source) {
  const int n = g.size();
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<bool> visited(n, false);
  std::function<void(int, double)> dfs = [&](int u, double d) {
    if (d < best[u]) best[u] = d;
    visited[u] = true;
    for (const auto& [v, w] : g.neighbors(u))
      if (!visited[v]) dfs(v, d + w);
    visited[u] = false;
  };
  dfs(source, 0.0);
  return best;
}

/// Unknown voxels visible inside a frustum, checked per voxel center:
/// range and FOV bounds, plus line of sight by fine marching (no occupied
/// voxel strictly before the target).
inline std::set<std::size_t> frustum_visible_unknown(const RobotConfig& pose,
                                                     const SensorFrustum& f,
                                                     const VoxelMap& map) {
  std::set<std::size_t> out;
  const Vec3 origin = f.origin_for(pose);
  const Vec3i dims = map.extents();
  Vec3i v;
  for (v.z() = 0; v.z() < dims.z(); ++v.z()) {
    for (v.y() = 0; v.y() < dims.y(); ++v.y()) {
      for (v.x() = 0; v.x() < dims.x(); ++v.x()) {
        if (map.state(v) != VoxelState::kUnknown) continue;
        const Vec3 c = map.center_of(v);
        const Vec3 rel = c - origin;
        const double range = rel.norm();
        if (range > f.max_range || range < 1e-9) continue;
        const double az =
            wrap_angle(std::atan2(rel.y(), rel.x()) - pose.heading);
        const double el = std::atan2(rel.z(), std::hypot(rel.x(), rel.y()));
        if (std::abs(az) > 0.5 * f.fov_h || std::abs(el) > 0.5 * f.fov_v)
          continue;
        const auto hit = march_first_hit(map, origin, rel / range, range);
        if (hit && hit->voxel != v) continue;
        out.insert(map.flat_index(v));
      }
    }
  }
  return out;
}

/// All voxels overlapped by a box, found by testing every voxel in the map.
inline std::vector<Vec3i> box_overlap_voxels(const VoxelMap& map,
                                             const Aabb& box) {
  std::vector<Vec3i> out;
  const Vec3i dims = map.extents();
  const double res = map.resolution();
  Vec3i v;
  for (v.z() = 0; v.z() < dims.z(); ++v.z())
    for (v.y() = 0; v.y() < dims.y(); ++v.y())
      for (v.x() = 0; v.x() < dims.x(); ++v.x()) {
        const Vec3 lo = map.origin() + res * v.cast<double>();
        const Aabb cell{lo, lo + Vec3::Constant(res)};
        if (cell.intersects(box)) out.push_back(v);
      }
  return out;
}

/// Reference segment admissibility: robot-box placements every res/2 along
/// the segment, each checked against the exhaustive voxel overlap above and
/// against every geofence. Also requires the whole body inside the grid.
inline bool segment_admissible_bruteforce(const VoxelMap& map, const Vec3& a,
                                          const Vec3& b, const Vec3& half) {
  const double len = (b - a).norm();
  const int steps =
      std::max(1, static_cast<int>(std::ceil(len / (0.5 * map.resolution()))));
  for (int s = 0; s <= steps; ++s) {
    const Vec3 c = a + (static_cast<double>(s) / steps) * (b - a);
    const Aabb body = Aabb::from_center_half(c, half);
    const Aabb grid = map.bounds();
    for (int i = 0; i < 3; ++i)
      if (body.min[i] < grid.min[i] || body.max[i] > grid.max[i]) return false;
    for (const Vec3i& v : box_overlap_voxels(map, body))
      if (map.state(v) != VoxelState::kFree) return false;
  }
  for (const Aabb& g : map.geofences()) {
    const int fine = std::max(2, 8 * steps);
    for (int s = 0; s <= fine; ++s) {
      const Vec3 c = a + (static_cast<double>(s) / fine) * (b - a);
      if (Aabb::from_center_half(c, half).intersects(g)) return false;
    }
  }
  return true;
}

/// Nearest occupied voxel center by scanning the entire grid.
inline double clearance_bruteforce(const VoxelMap& map, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  const Vec3i dims = map.extents();
  Vec3i v;
  for (v.z() = 0; v.z() < dims.z(); ++v.z())
    for (v.y() = 0; v.y() < dims.y(); ++v.y())
      for (v.x() = 0; v.x() < dims.x(); ++v.x())
        if (map.state(v) == VoxelState::kOccupied)
          best = std::min(best, (map.center_of(v) - p).norm());
  return best;
}

}  // namespace voxplan::oracle

#endif  // VOXPLAN_TESTS_ORACLES_HPP
