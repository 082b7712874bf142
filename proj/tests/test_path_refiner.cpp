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

#include "voxplan/path_refiner.hpp"

#include <random>

#include <gtest/gtest.h>

#include "map_fixtures.hpp"
#include "oracles.hpp"

using namespace voxplan;
using fixtures::paint_all;
using fixtures::paint_box;

namespace {

const Vec3 kHalf(0.15, 0.15, 0.15);

PlannedPath manual_path(const std::vector<Vec3>& pts) {
  PlannedPath p;
  for (std::size_t i = 0; i < pts.size(); ++i)
    p.vertices.push_back(
        {RobotConfig(pts[i], 0.0, kHalf), static_cast<int>(i)});
  p.length = p.compute_length();
  return p;
}

/// 10 x 2 x 2 m free corridor with occupied walls on both y sides.
VoxelMap walled_corridor() {
  VoxelMap map(Vec3(0, -0.6, 0), 0.2, Vec3i(50, 16, 10));
  paint_all(map, VoxelState::kFree);
  paint_box(map, {{0.0, -0.6, 0.0}, {10.0, 0.0, 2.0}}, VoxelState::kOccupied);
  paint_box(map, {{0.0, 2.0, 0.0}, {10.0, 2.6, 2.0}}, VoxelState::kOccupied);
  return map;
}

}  // namespace

TEST(Refine, OpenSpaceStaysUntouched) {
  VoxelMap map(Vec3::Zero(), 0.2, Vec3i(40, 40, 10));
  paint_all(map, VoxelState::kFree);
  const PlannedPath path =
      manual_path({{1, 4, 1}, {3, 4, 1}, {5, 4, 1}, {7, 4, 1}});
  const PlannedPath out = refine(path, map, kHalf, {0.8, 10});
  ASSERT_EQ(out.vertices.size(), path.vertices.size());
  for (std::size_t i = 0; i < out.vertices.size(); ++i)
    EXPECT_EQ(out.vertices[i].config.position,
              path.vertices[i].config.position);
}

TEST(Refine, WallHuggingVertexReachesTargetClearance) {
  const VoxelMap map = walled_corridor();
  // Interior vertex 0.3 m from the lower wall of the 2 m corridor.
  PlannedPath path = manual_path({{2, 1.0, 1}, {5, 0.3, 1}, {8, 1.0, 1}});
  ASSERT_TRUE(map.segment_admissible({2, 1.0, 1}, {5, 0.3, 1}, kHalf));
  const double target = 0.8;
  const PlannedPath out = refine(path, map, kHalf, {target, 10});
  const Vec3 moved = out.vertices[1].config.position;
  EXPECT_GT(moved.y(), 0.3);  // pushed toward the centerline
  EXPECT_GE(oracle::clearance_bruteforce(map, moved), target);
}

TEST(Refine, SingleSegmentPathUnchanged) {
  const VoxelMap map = walled_corridor();
  const PlannedPath path = manual_path({{2, 1, 1}, {8, 1, 1}});
  const PlannedPath out = refine(path, map, kHalf, {0.8, 10});
  ASSERT_EQ(out.vertices.size(), 2u);
  EXPECT_EQ(out.vertices[0].config.position, path.vertices[0].config.position);
  EXPECT_EQ(out.vertices[1].config.position, path.vertices[1].config.position);
}

TEST(Refine, InvariantsOnRandomPaths) {
  const VoxelMap map = walled_corridor();
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> x(1.0, 9.0);
  std::uniform_real_distribution<double> y(0.25, 1.75);
  std::uniform_real_distribution<double> z(0.4, 1.6);
  int refined_cases = 0;
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<Vec3> pts;
    double xs = x(rng);
    for (int i = 0; i < 4; ++i) {
      pts.emplace_back(std::min(9.5, xs), y(rng), z(rng));
      xs += 1.5;
    }
    PlannedPath path = manual_path(pts);
    bool admissible = true;
    for (std::size_t i = 1; i < pts.size(); ++i)
      admissible = admissible &&
                   map.segment_admissible(pts[i - 1], pts[i], kHalf);
    if (!admissible) continue;
    ++refined_cases;

    const PlannedPath out = refine(path, map, kHalf, {0.7, 10});
    // Endpoints bit-identical.
    EXPECT_EQ(out.vertices.front().config.position, pts.front());
    EXPECT_EQ(out.vertices.back().config.position, pts.back());
    // Segments stay admissible.
    for (std::size_t i = 1; i < out.vertices.size(); ++i)
      EXPECT_TRUE(map.segment_admissible(
          out.vertices[i - 1].config.position,
          out.vertices[i].config.position, kHalf));
    // Per-vertex clearance is monotone (or the vertex did not move).
    for (std::size_t i = 1; i + 1 < out.vertices.size(); ++i) {
      const Vec3& before = path.vertices[i].config.position;
      const Vec3& after = out.vertices[i].config.position;
      if (after == before) continue;
      EXPECT_GT(oracle::clearance_bruteforce(map, after),
                oracle::clearance_bruteforce(map, before) - 1e-9);
    }
  }
  EXPECT_GT(refined_cases, 10);
}
