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

#ifndef VOXPLAN_PATH_REFINER_HPP
#define VOXPLAN_PATH_REFINER_HPP

#include <cmath>

#include "voxplan/graph.hpp"
#include "voxplan/voxel_map.hpp"

namespace voxplan {

/// Distance from a point to the nearest occupied voxel center, searched
/// within `radius`. Returns `radius` when nothing occupied is that close.
inline double obstacle_clearance(const VoxelMap& map, const Vec3& p,
                                 double radius) {
  const double res = map.resolution();
  Vec3i lo, hi;
  for (int i = 0; i < 3; ++i) {
    lo[i] = std::max(0, static_cast<int>(std::floor(
                            (p[i] - radius - map.origin()[i]) / res)));
    hi[i] = std::min(map.extents()[i] - 1,
                     static_cast<int>(std::floor(
                         (p[i] + radius - map.origin()[i]) / res)));
  }
  double best = radius;
  Vec3i v;
  for (v.z() = lo.z(); v.z() <= hi.z(); ++v.z())
    for (v.y() = lo.y(); v.y() <= hi.y(); ++v.y())
      for (v.x() = lo.x(); v.x() <= hi.x(); ++v.x())
        if (map.state(v) == VoxelState::kOccupied)
          best = std::min(best, (map.center_of(v) - p).norm());
  return best;
}

struct RefineParams {
  double target_clearance = 0.8;  // m
  int max_iterations = 10;
};

/// Pushes interior path vertices away from obstacles along the gradient of
/// the clearance field (6-neighborhood finite differences at one-voxel
/// step). A displacement is kept only when it raises the vertex clearance
/// and both adjacent segments stay admissible; endpoints never move.
inline PlannedPath refine(const PlannedPath& path, const VoxelMap& map,
                          const Vec3& robot_half, const RefineParams& rp) {
  PlannedPath out = path;
  if (out.vertices.size() < 3) return out;
  const double res = map.resolution();
  const double search = rp.target_clearance + 3.0 * res;
  for (std::size_t i = 1; i + 1 < out.vertices.size(); ++i) {
    Vec3 p = out.vertices[i].config.position;
    double clearance = obstacle_clearance(map, p, search);
    for (int iter = 0; iter < rp.max_iterations; ++iter) {
      if (clearance >= rp.target_clearance) break;
      Vec3 grad;
      for (int axis = 0; axis < 3; ++axis) {
        Vec3 fwd = p, bwd = p;
        fwd[axis] += res;
        bwd[axis] -= res;
        grad[axis] = (obstacle_clearance(map, fwd, search) -
                      obstacle_clearance(map, bwd, search)) /
                     (2.0 * res);
      }
      if (grad.norm() < 1e-9) break;
      const Vec3 moved = p + res * grad.normalized();
      const double moved_clearance = obstacle_clearance(map, moved, search);
      if (moved_clearance <= clearance) break;
      if (!map.segment_admissible(out.vertices[i - 1].config.position, moved,
                                  robot_half) ||
          !map.segment_admissible(moved, out.vertices[i + 1].config.position,
                                  robot_half))
        break;
      p = moved;
      clearance = moved_clearance;
    }
    out.vertices[i].config.position = p;
  }
  out.length = out.compute_length();
  return out;
}

}  // namespace voxplan

#endif  // VOXPLAN_PATH_REFINER_HPP
