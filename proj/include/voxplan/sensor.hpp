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

#ifndef VOXPLAN_SENSOR_HPP
#define VOXPLAN_SENSOR_HPP

#include <algorithm>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "voxplan/geometry.hpp"
#include "voxplan/voxel_map.hpp"

namespace voxplan {

/// Range-sensor frustum: effective range, horizontal/vertical field of view,
/// and the fixed angular step used for ray casting.
struct SensorFrustum {
  double max_range = 5.0;
  double fov_h = 2.0 * kPi;
  double fov_v = 2.0944;              // 120 deg
  double angular_step = kPi / 90.0;   // 2 deg
  Vec3 mount_offset = Vec3::Zero();

  void validate() const {
    if (!(max_range > 0.0)) throw std::invalid_argument("max_range must be > 0");
    if (!(fov_h > 0.0 && fov_h <= 2.0 * kPi + 1e-9))
      throw std::invalid_argument("fov_h out of (0, 2pi]");
    if (!(fov_v > 0.0 && fov_v <= kPi + 1e-9))
      throw std::invalid_argument("fov_v out of (0, pi]");
    if (!(angular_step > 0.0))
      throw std::invalid_argument("angular_step must be > 0");
  }

  Vec3 origin_for(const RobotConfig& pose) const {
    return pose.position + rotate_z(mount_offset, pose.heading);
  }
};

namespace detail {

// Angular offsets from the lower FOV bound in exact step increments, so that
// halving the step yields a superset of directions.
inline std::vector<double> angle_offsets(double span, double step,
                                         bool full_circle) {
  std::vector<double> out;
  if (full_circle) {
    const int n = std::max(1, static_cast<int>(std::floor(2.0 * kPi / step + 1e-9)));
    out.reserve(n);
    for (int k = 0; k < n; ++k) out.push_back(-kPi + k * step);
  } else {
    const int n = static_cast<int>(std::floor(span / step + 1e-9));
    out.reserve(n + 1);
    for (int k = 0; k <= n; ++k) out.push_back(-0.5 * span + k * step);
  }
  return out;
}

}  // namespace detail

/// World-frame unit ray directions of the frustum for a robot heading.
inline std::vector<Vec3> ray_directions(const SensorFrustum& f,
                                        double heading) {
  const bool full = f.fov_h >= 2.0 * kPi - 1e-9;
  const auto az = detail::angle_offsets(f.fov_h, f.angular_step, full);
  const auto el = detail::angle_offsets(f.fov_v, f.angular_step, false);
  std::vector<Vec3> dirs;
  dirs.reserve(az.size() * el.size());
  for (double e : el) {
    const double ce = std::cos(e), se = std::sin(e);
    for (double a : az) {
      const double yaw = heading + a;
      dirs.emplace_back(ce * std::cos(yaw), ce * std::sin(yaw), se);
    }
  }
  return dirs;
}

/// Flat indices of the distinct unknown voxels visible from `pose` by ray
/// casting. Rays march at the frustum's angular step and stop at the first
/// occupied voxel or at max range; a traversed voxel counts when its center
/// lies inside the frustum model (range and FOV bounds), each at most once.
inline std::vector<std::size_t> volume_gain_voxels(const RobotConfig& pose,
                                                   const SensorFrustum& f,
                                                   const VoxelMap& map) {
  thread_local std::vector<std::uint32_t> stamp;
  thread_local std::uint32_t epoch = 0;
  if (stamp.size() < map.num_voxels()) stamp.assign(map.num_voxels(), 0);
  ++epoch;

  const Vec3 origin = f.origin_for(pose);
  const bool full_circle = f.fov_h >= 2.0 * kPi - 1e-9;
  auto center_in_frustum = [&](const Vec3i& v) {
    const Vec3 rel = map.center_of(v) - origin;
    const double range = rel.norm();
    if (range > f.max_range || range < 1e-9) return false;
    const double el = std::atan2(rel.z(), std::hypot(rel.x(), rel.y()));
    if (std::abs(el) > 0.5 * f.fov_v) return false;
    if (full_circle) return true;
    const double az = wrap_angle(std::atan2(rel.y(), rel.x()) - pose.heading);
    return std::abs(az) <= 0.5 * f.fov_h;
  };

  std::vector<std::size_t> seen;
  for (const Vec3& dir : ray_directions(f, pose.heading)) {
    const Vec3 end = origin + f.max_range * dir;
    map.traverse(origin, end, [&](const Vec3i& v) {
      const VoxelState s = map.state(v);
      if (s == VoxelState::kOccupied) return false;
      if (s == VoxelState::kUnknown) {
        const std::size_t idx = map.flat_index(v);
        if (stamp[idx] != epoch) {
          stamp[idx] = epoch;
          if (center_in_frustum(v)) seen.push_back(idx);
        }
      }
      return true;
    });
  }
  return seen;
}

/// VolumeGain: the count of distinct unknown voxels inside the frustum model.
inline double volume_gain(const RobotConfig& pose, const SensorFrustum& f,
                          const VoxelMap& map) {
  return static_cast<double>(volume_gain_voxels(pose, f, map).size());
}

/// Simulates one depth scan against ground-truth geometry given as the union
/// of free-space boxes (everything else is solid). Each ray reports the
/// distance at which it first leaves the free-space union, or a max-range
/// return. Optional Gaussian range noise, seeded by the caller's engine.
inline Scan simulate_scan(const RobotConfig& pose, const SensorFrustum& f,
                          std::span<const Aabb> free_boxes,
                          double noise_sigma = 0.0,
                          std::mt19937_64* rng = nullptr) {
  Scan scan;
  scan.origin = f.origin_for(pose);
  std::normal_distribution<double> noise(0.0, noise_sigma);
  std::vector<std::pair<double, double>> spans;
  for (const Vec3& dir : ray_directions(f, pose.heading)) {
    const Vec3 far = scan.origin + (f.max_range + 1.0) * dir;
    spans.clear();
    for (const Aabb& box : free_boxes) {
      if (auto t = clip_segment_to_box(scan.origin, far, box))
        spans.push_back(*t);
    }
    std::sort(spans.begin(), spans.end());
    double covered = 0.0;  // parametric distance up to which we are in free space
    for (const auto& [t0, t1] : spans) {
      if (t0 > covered + 1e-9) break;
      covered = std::max(covered, t1);
    }
    const double scale = (f.max_range + 1.0);
    double hit_dist = covered * scale;
    ScanRay ray;
    ray.direction = dir;
    if (hit_dist >= f.max_range) {
      ray.hit = false;
      ray.range = f.max_range;
    } else {
      ray.hit = true;
      ray.range = hit_dist;
      if (noise_sigma > 0.0 && rng) {
        ray.range = std::clamp(ray.range + noise(*rng), 0.01, f.max_range);
      }
    }
    scan.rays.push_back(ray);
  }
  return scan;
}

}  // namespace voxplan

#endif  // VOXPLAN_SENSOR_HPP
