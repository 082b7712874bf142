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

#ifndef VOXPLAN_GEOMETRY_HPP
#define VOXPLAN_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/Core>

namespace voxplan {

using Vec3 = Eigen::Vector3d;
using Vec3i = Eigen::Vector3i;

inline constexpr double kPi = 3.14159265358979323846;

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

/// Rotates a vector about +z by yaw.
inline Vec3 rotate_z(const Vec3& v, double yaw) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y(), v.z()};
}

/// Axis-aligned box, closed on all faces.
struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  static Aabb from_center_half(const Vec3& center, const Vec3& half) {
    return {center - half, center + half};
  }

  bool empty() const {
    return min.x() > max.x() || min.y() > max.y() || min.z() > max.z();
  }

  Vec3 center() const { return 0.5 * (min + max); }
  Vec3 extent() const { return max - min; }

  bool contains(const Vec3& p) const {
    return p.x() >= min.x() && p.x() <= max.x() && p.y() >= min.y() &&
           p.y() <= max.y() && p.z() >= min.z() && p.z() <= max.z();
  }

  bool intersects(const Aabb& o) const {
    return min.x() <= o.max.x() && max.x() >= o.min.x() &&
           min.y() <= o.max.y() && max.y() >= o.min.y() &&
           min.z() <= o.max.z() && max.z() >= o.min.z();
  }

  Aabb clamped_to(const Aabb& o) const {
    return {min.cwiseMax(o.min), max.cwiseMin(o.max)};
  }

  Aabb inflated(const Vec3& half) const { return {min - half, max + half}; }

  bool operator==(const Aabb& o) const {
    return min == o.min && max == o.max;
  }
};

/// Clips the parametric range of segment a + t*(b-a), t in [0,1], against a
/// box. Returns the surviving [t0, t1] or nullopt when the segment misses.
inline std::optional<std::pair<double, double>> clip_segment_to_box(
    const Vec3& a, const Vec3& b, const Aabb& box) {
  double t0 = 0.0, t1 = 1.0;
  const Vec3 d = b - a;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(d[i]) < 1e-12) {
      if (a[i] < box.min[i] || a[i] > box.max[i]) return std::nullopt;
      continue;
    }
    double lo = (box.min[i] - a[i]) / d[i];
    double hi = (box.max[i] - a[i]) / d[i];
    if (lo > hi) std::swap(lo, hi);
    t0 = std::max(t0, lo);
    t1 = std::min(t1, hi);
    if (t0 > t1) return std::nullopt;
  }
  return std::make_pair(t0, t1);
}

/// True when a box of the given half extents, swept from a to b, touches the
/// obstacle box at any point of the motion. Exact (Minkowski-inflated slab
/// test), no discretization.
inline bool swept_box_intersects(const Vec3& a, const Vec3& b,
                                 const Vec3& half, const Aabb& obstacle) {
  return clip_segment_to_box(a, b, obstacle.inflated(half)).has_value();
}

}  // namespace voxplan

#endif  // VOXPLAN_GEOMETRY_HPP
