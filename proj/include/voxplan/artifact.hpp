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

#ifndef VOXPLAN_ARTIFACT_HPP
#define VOXPLAN_ARTIFACT_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "voxplan/sensor.hpp"
#include "voxplan/voxel_map.hpp"

namespace voxplan {

enum class ArtifactClass {
  kSurvivor,
  kCellPhone,
  kBackpack,
  kDrill,
  kFireExtinguisher,
  kGas,
  kVent,
};

inline constexpr int kNumArtifactClasses = 7;

/// Points within this distance of a surveyed artifact, with the right class,
/// score one point.
inline constexpr double kScoringRadius = 5.0;

inline const char* artifact_class_name(ArtifactClass c) {
  switch (c) {
    case ArtifactClass::kSurvivor: return "survivor";
    case ArtifactClass::kCellPhone: return "cell_phone";
    case ArtifactClass::kBackpack: return "backpack";
    case ArtifactClass::kDrill: return "drill";
    case ArtifactClass::kFireExtinguisher: return "fire_extinguisher";
    case ArtifactClass::kGas: return "gas";
    default: return "vent";
  }
}

inline ArtifactClass artifact_class_from_name(const std::string& name) {
  for (int i = 0; i < kNumArtifactClasses; ++i) {
    const auto c = static_cast<ArtifactClass>(i);
    if (name == artifact_class_name(c)) return c;
  }
  throw std::invalid_argument("unknown artifact class '" + name + "'");
}

/// Classes sensed by proximity (signal strength / gas concentration) rather
/// than by camera; their detections carry the robot position itself.
inline bool is_proximity_class(ArtifactClass c) {
  return c == ArtifactClass::kCellPhone || c == ArtifactClass::kGas;
}

struct Artifact {
  std::string id;
  ArtifactClass cls = ArtifactClass::kSurvivor;
  Vec3 position = Vec3::Zero();
};

/// One detector firing: a normalized image-plane box plus the robot pose the
/// mapping stack believed at that moment. Proximity detections skip the box.
struct Detection {
  double t = 0.0;
  RobotConfig pose;  // reported (odometry-frame) pose at detection time
  ArtifactClass cls = ArtifactClass::kSurvivor;
  SensorFrustum camera;
  double box_cx = 0.5, box_cy = 0.5, box_w = 0.0, box_h = 0.0;
  bool range_only = false;
  Vec3 range_only_point = Vec3::Zero();
};

struct DetectionParams {
  double detection_range = 8.0;   // m, visual classes
  double proximity_range = 3.0;   // m, cell phone / gas
  double false_negative_rate = 0.0;
  double box_jitter_sigma = 0.0;  // normalized image units, per axis
  double box_angular_size = 0.15; // rad, apparent artifact size
};

/// Simulates the detector for one tick. An artifact fires when it is inside
/// the camera frustum, within range, and the map ray toward it meets no
/// occupied voxel first. Geometry is evaluated at the true pose; the emitted
/// detection carries the reported pose, so localization drift propagates
/// into the report exactly as it would on a robot.
inline std::vector<Detection> simulate_detections(
    const RobotConfig& true_pose, const RobotConfig& reported_pose,
    const SensorFrustum& camera, const std::vector<Artifact>& artifacts,
    const VoxelMap& map, const DetectionParams& params, double t,
    std::mt19937_64& rng) {
  std::vector<Detection> out;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, params.box_jitter_sigma);
  const Vec3 origin_true = camera.origin_for(true_pose);
  const Vec3 origin_map = camera.origin_for(reported_pose);

  for (const Artifact& a : artifacts) {
    if (is_proximity_class(a.cls)) {
      if ((a.position - true_pose.position).norm() > params.proximity_range)
        continue;
      if (params.false_negative_rate > 0.0 &&
          coin(rng) < params.false_negative_rate)
        continue;
      Detection d;
      d.t = t;
      d.pose = reported_pose;
      d.cls = a.cls;
      d.camera = camera;
      d.range_only = true;
      d.range_only_point = reported_pose.position;
      out.push_back(d);
      continue;
    }

    const Vec3 rel = a.position - origin_true;
    const double range = rel.norm();
    if (range > params.detection_range || range < 1e-6) continue;
    const double az_rel =
        wrap_angle(std::atan2(rel.y(), rel.x()) - true_pose.heading);
    const double el = std::atan2(rel.z(), std::hypot(rel.x(), rel.y()));
    if (std::abs(az_rel) > 0.5 * camera.fov_h ||
        std::abs(el) > 0.5 * camera.fov_v)
      continue;

    // Occluded if a mapped surface sits on the ray strictly before the
    // artifact (one-voxel slack keeps wall-mounted artifacts visible).
    bool occluded = false;
    const Vec3 dir = rel / range;
    const double cutoff = range - map.resolution();
    map.traverse(origin_map, origin_map + range * dir, [&](const Vec3i& v) {
      if (map.state(v) != VoxelState::kOccupied) return true;
      const Aabb cell{map.center_of(v) - Vec3::Constant(0.5 * map.resolution()),
                      map.center_of(v) + Vec3::Constant(0.5 * map.resolution())};
      const auto clip = clip_segment_to_box(origin_map, origin_map + range * dir,
                                            cell);
      if (clip && clip->first * range < cutoff) occluded = true;
      return false;
    });
    if (occluded) continue;
    if (params.false_negative_rate > 0.0 &&
        coin(rng) < params.false_negative_rate)
      continue;

    Detection d;
    d.t = t;
    d.pose = reported_pose;
    d.cls = a.cls;
    d.camera = camera;
    d.box_w = std::min(1.0, params.box_angular_size / camera.fov_h);
    d.box_h = std::min(1.0, params.box_angular_size / camera.fov_v);
    double cx = 0.5 + az_rel / camera.fov_h;
    double cy = 0.5 - el / camera.fov_v;
    if (params.box_jitter_sigma > 0.0) {
      cx += jitter(rng);
      cy += jitter(rng);
    }
    d.box_cx = std::clamp(cx, 0.5 * d.box_w, 1.0 - 0.5 * d.box_w);
    d.box_cy = std::clamp(cy, 0.5 * d.box_h, 1.0 - 0.5 * d.box_h);
    out.push_back(d);
  }
  return out;
}

/// Projects a bounding-box detection to a 3D point: one ray per grid cell is
/// cast into the map until its first occupied voxel, surviving hits are
/// sorted by range, and the lower-median hit is returned. nullopt when no
/// ray meets a mapped surface within range (the detection is discarded).
inline std::optional<Vec3> bbox_to_point(const Detection& det,
                                         const VoxelMap& map, int grid_rows,
                                         int grid_cols) {
  if (det.range_only) return det.range_only_point;
  const Vec3 origin = det.camera.origin_for(det.pose);
  struct Hit {
    double dist;
    int ray;
    Vec3 point;
  };
  std::vector<Hit> hits;
  int ray_index = 0;
  for (int r = 0; r < grid_rows; ++r) {
    for (int c = 0; c < grid_cols; ++c, ++ray_index) {
      const double u =
          det.box_cx - 0.5 * det.box_w + (c + 0.5) * det.box_w / grid_cols;
      const double v =
          det.box_cy - 0.5 * det.box_h + (r + 0.5) * det.box_h / grid_rows;
      const double az = det.pose.heading + (u - 0.5) * det.camera.fov_h;
      const double el = (0.5 - v) * det.camera.fov_v;
      const Vec3 dir{std::cos(el) * std::cos(az), std::cos(el) * std::sin(az),
                     std::sin(el)};
      const Vec3 end = origin + det.camera.max_range * dir;
      map.traverse(origin, end, [&](const Vec3i& vox) {
        if (map.state(vox) != VoxelState::kOccupied) return true;
        const Aabb cell{
            map.center_of(vox) - Vec3::Constant(0.5 * map.resolution()),
            map.center_of(vox) + Vec3::Constant(0.5 * map.resolution())};
        if (const auto clip = clip_segment_to_box(origin, end, cell)) {
          const double dist = clip->first * det.camera.max_range;
          hits.push_back({dist, ray_index, origin + dist * dir});
        }
        return false;
      });
    }
  }
  if (hits.empty()) return std::nullopt;
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    return a.dist < b.dist || (a.dist == b.dist && a.ray < b.ray);
  });
  return hits[(hits.size() - 1) / 2].point;
}

struct BayesParams {
  double p_hit = 0.7;
  double p_miss = 0.3;
  double confirm_threshold = 0.9;
};

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Association sphere with one binary Bayes filter per artifact class. The
/// center tracks the running mean of absorbed points until the hypothesis
/// freezes.
struct ArtifactHypothesis {
  int id = -1;
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
  std::array<double, kNumArtifactClasses> log_odds{};
  int detection_count = 0;
  bool frozen = false;
  Detection representative;

  double probability(ArtifactClass c) const {
    return logistic(log_odds[static_cast<int>(c)]);
  }

  ArtifactClass best_class() const {
    int best = 0;
    for (int i = 1; i < kNumArtifactClasses; ++i)
      if (log_odds[i] > log_odds[best]) best = i;
    return static_cast<ArtifactClass>(best);
  }
};

struct Report {
  ArtifactClass cls = ArtifactClass::kSurvivor;
  Vec3 position = Vec3::Zero();
  int hypothesis_id = -1;
  std::optional<bool> scored;
};

/// Single-writer store of artifact hypotheses, updated in detection order.
class HypothesisStore {
 public:
  HypothesisStore(double sphere_radius, const BayesParams& bayes)
      : radius_(sphere_radius), bayes_(bayes) {}

  const std::vector<ArtifactHypothesis>& hypotheses() const { return hyps_; }
  ArtifactHypothesis& hypothesis(int id) { return hyps_[id]; }

  /// Absorbs the measured point into the nearest hypothesis whose sphere
  /// contains it, or opens a new hypothesis seeded with one update from the
  /// uniform prior. Points inside a frozen sphere belong to an already
  /// reported object and change nothing. Returns the hypothesis id.
  int associate_and_update(const Vec3& point, ArtifactClass cls,
                           const Detection& det) {
    const double step = std::log(bayes_.p_hit / bayes_.p_miss);
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const ArtifactHypothesis& h : hyps_) {
      const double d = (h.center - point).norm();
      if (d <= h.radius && d < best_dist) {
        best_dist = d;
        best = h.id;
      }
    }
    if (best >= 0) {
      ArtifactHypothesis& h = hyps_[best];
      if (h.frozen) return best;
      h.center = (h.center * h.detection_count + point) /
                 (h.detection_count + 1);
      h.detection_count += 1;
      h.log_odds[static_cast<int>(cls)] += step;
      return best;
    }
    ArtifactHypothesis h;
    h.id = static_cast<int>(hyps_.size());
    h.center = point;
    h.radius = radius_;
    h.detection_count = 1;
    h.log_odds[static_cast<int>(cls)] = step;
    h.representative = det;
    hyps_.push_back(h);
    return h.id;
  }

  /// Emits a report and freezes the hypothesis once any class probability
  /// exceeds the confirmation threshold. Frozen hypotheses never report
  /// again.
  std::optional<Report> confirm_and_freeze(int id) {
    ArtifactHypothesis& h = hyps_[id];
    if (h.frozen) return std::nullopt;
    const ArtifactClass cls = h.best_class();
    if (h.probability(cls) <= bayes_.confirm_threshold) return std::nullopt;
    h.frozen = true;
    Report r;
    r.cls = cls;
    r.position = h.center;
    r.hypothesis_id = id;
    return r;
  }

 private:
  std::vector<ArtifactHypothesis> hyps_;
  double radius_;
  BayesParams bayes_;
};

/// Scores a report against the surveyed artifacts: a point is earned when an
/// unconsumed artifact of the same class lies within the scoring radius; the
/// nearest such artifact is consumed so nothing scores twice.
inline bool score_report(Report& report, const std::vector<Artifact>& artifacts,
                         std::vector<bool>& consumed) {
  int best = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < artifacts.size(); ++i) {
    if (consumed[i] || artifacts[i].cls != report.cls) continue;
    const double d = (artifacts[i].position - report.position).norm();
    if (d <= kScoringRadius && d < best_dist) {
      best_dist = d;
      best = static_cast<int>(i);
    }
  }
  if (best < 0) {
    report.scored = false;
    return false;
  }
  consumed[best] = true;
  report.scored = true;
  return true;
}

}  // namespace voxplan

#endif  // VOXPLAN_ARTIFACT_HPP
