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

#include "voxplan/dtw.hpp"

#include <gtest/gtest.h>

using namespace voxplan;

TEST(Resample, StraightLineAtExactSpacing) {
  const std::vector<Vec3> line = {{0, 0, 0}, {2, 0, 0}};
  const auto pts = resample_polyline(line, 0.5);
  ASSERT_EQ(pts.size(), 5u);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(pts[i].x(), 0.5 * i, 1e-12);
}

TEST(Resample, KeepsFinalPointOnUnevenLength) {
  const std::vector<Vec3> line = {{0, 0, 0}, {1.3, 0, 0}};
  const auto pts = resample_polyline(line, 0.5);
  ASSERT_EQ(pts.size(), 4u);
  EXPECT_NEAR(pts.back().x(), 1.3, 1e-12);
}

TEST(Resample, WalksCorners) {
  const std::vector<Vec3> bend = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}};
  const auto pts = resample_polyline(bend, 0.5);
  // Arc length 2.0: samples at 0, 0.5, 1.0 (the corner), 1.5, 2.0.
  ASSERT_EQ(pts.size(), 5u);
  EXPECT_NEAR((pts[2] - Vec3(1, 0, 0)).norm(), 0.0, 1e-12);
  EXPECT_NEAR((pts[4] - Vec3(1, 1, 0)).norm(), 0.0, 1e-12);
}

TEST(Dtw, IdenticalSequencesAreZero) {
  const std::vector<Vec3> a = {{0, 0, 0}, {1, 0, 0}, {2, 1, 0}};
  EXPECT_DOUBLE_EQ(dtw_distance(a, a), 0.0);
}

TEST(Dtw, HandComputedTwoPointCase) {
  // Parallel unit-offset pairs: diagonal alignment costs 1 + 1, normalized
  // by the combined length 4.
  const std::vector<Vec3> a = {{0, 0, 0}, {1, 0, 0}};
  const std::vector<Vec3> b = {{0, 1, 0}, {1, 1, 0}};
  EXPECT_NEAR(dtw_distance(a, b), 0.5, 1e-12);
}

TEST(Dtw, ParallelOffsetScalesWithOffset) {
  std::vector<Vec3> a, b;
  for (int i = 0; i <= 10; ++i) {
    a.emplace_back(0.5 * i, 0.0, 0.0);
    b.emplace_back(0.5 * i, 2.0, 0.0);
  }
  // Every matched pair is 2 m apart; normalization halves it.
  EXPECT_NEAR(dtw_distance(a, b), 1.0, 1e-12);
}

TEST(Dtw, SymmetricInArguments) {
  const std::vector<Vec3> a = {{0, 0, 0}, {1, 0, 0}, {2, 0.4, 0}};
  const std::vector<Vec3> b = {{0, 0.2, 0}, {0.8, 0.1, 0}, {2, 0, 0},
                               {2.5, 0, 0}};
  EXPECT_DOUBLE_EQ(dtw_distance(a, b), dtw_distance(b, a));
}

TEST(Dtw, OppositeDirectionsAreFar) {
  std::vector<Vec3> a, b;
  for (int i = 0; i <= 20; ++i) {
    a.emplace_back(0.5 * i, 0.0, 0.0);
    b.emplace_back(-0.5 * i, 0.0, 0.0);
  }
  EXPECT_GT(dtw_distance(a, b), 4.0);
}

TEST(Dtw, PathSimilarityResamplesFirst) {
  // Same polyline expressed with different vertex counts is near-identical
  // after resampling.
  const std::vector<Vec3> sparse = {{0, 0, 0}, {4, 0, 0}};
  const std::vector<Vec3> dense = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0},
                                   {3, 0, 0}, {4, 0, 0}};
  EXPECT_NEAR(path_similarity(sparse, dense, 0.5), 0.0, 1e-9);
}
