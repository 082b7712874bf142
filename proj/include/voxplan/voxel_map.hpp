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

#ifndef VOXPLAN_VOXEL_MAP_HPP
#define VOXPLAN_VOXEL_MAP_HPP

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "voxplan/geometry.hpp"

namespace voxplan {

enum class VoxelState : std::uint8_t { kUnknown = 0, kFree = 1, kOccupied = 2 };

enum class RobotClass { kLegged, kAerial };

/// Robot state: position, heading about +z, and the body bounding box as
/// half extents.
struct RobotConfig {
  Vec3 position = Vec3::Zero();
  double heading = 0.0;
  Vec3 box_half = Vec3(0.2, 0.2, 0.15);

  RobotConfig() = default;
  RobotConfig(const Vec3& pos, double psi, const Vec3& half)
      : position(pos), heading(wrap_angle(psi)), box_half(half) {}

  Aabb body_box() const { return Aabb::from_center_half(position, box_half); }
};

/// Cuboid volume centered on the planning root.
struct LocalBound {
  Vec3 center = Vec3::Zero();
  Vec3 dimensions = Vec3(20.0, 20.0, 3.0);

  Aabb aabb() const {
    return Aabb::from_center_half(center, 0.5 * dimensions);
  }
};

/// One simulated depth return. `direction` is a unit vector in world frame;
/// rays that reached max range without a surface carry hit = false.
struct ScanRay {
  Vec3 direction = Vec3::UnitX();
  double range = 0.0;
  bool hit = false;
};

struct Scan {
  Vec3 origin = Vec3::Zero();
  std::vector<ScanRay> rays;
};

/// Dense three-state occupancy grid with geofence boxes.
///
/// Voxel (i,j,k) spans [origin + (i,j,k)*res, origin + (i+1,j+1,k+1)*res).
/// Everything outside the allocated extents classifies as unknown. The map
/// is a plain value: copying it yields the immutable snapshot planners read.
class VoxelMap {
 public:
  VoxelMap(const Vec3& origin, double resolution, const Vec3i& extents)
      : origin_(origin), res_(resolution), dims_(extents) {
    if (resolution <= 0.0) throw std::invalid_argument("resolution must be > 0");
    if (extents.minCoeff() <= 0) throw std::invalid_argument("extents must be > 0");
    grid_.assign(static_cast<std::size_t>(dims_.x()) * dims_.y() * dims_.z(),
                 VoxelState::kUnknown);
    unknown_count_ = grid_.size();
  }

  /// Builds a map whose grid covers `bounds` plus a margin of whole voxels on
  /// every side, so surfaces on the boundary stay representable.
  static VoxelMap covering(const Aabb& bounds, double resolution,
                           int margin_voxels = 2) {
    const Vec3 pad = Vec3::Constant(margin_voxels * resolution);
    const Vec3 lo = bounds.min - pad;
    const Vec3 span = bounds.max + pad - lo;
    Vec3i dims;
    for (int i = 0; i < 3; ++i)
      dims[i] = std::max(1, static_cast<int>(std::ceil(span[i] / resolution)));
    return VoxelMap(lo, resolution, dims);
  }

  const Vec3& origin() const { return origin_; }
  double resolution() const { return res_; }
  const Vec3i& extents() const { return dims_; }
  std::size_t num_voxels() const { return grid_.size(); }
  std::size_t unknown_count() const { return unknown_count_; }
  std::size_t free_count() const { return free_count_; }
  std::size_t occupied_count() const { return occupied_count_; }
  std::size_t known_count() const { return free_count_ + occupied_count_; }

  Aabb bounds() const {
    return {origin_, origin_ + res_ * dims_.cast<double>()};
  }

  bool in_grid(const Vec3i& v) const {
    return v.x() >= 0 && v.y() >= 0 && v.z() >= 0 && v.x() < dims_.x() &&
           v.y() < dims_.y() && v.z() < dims_.z();
  }

  std::optional<Vec3i> voxel_of(const Vec3& p) const {
    Vec3i v;
    for (int i = 0; i < 3; ++i)
      v[i] = static_cast<int>(std::floor((p[i] - origin_[i]) / res_));
    if (!in_grid(v)) return std::nullopt;
    return v;
  }

  Vec3 center_of(const Vec3i& v) const {
    return origin_ + res_ * (v.cast<double>() + Vec3::Constant(0.5));
  }

  std::size_t flat_index(const Vec3i& v) const {
    return static_cast<std::size_t>(v.x()) +
           static_cast<std::size_t>(dims_.x()) *
               (static_cast<std::size_t>(v.y()) +
                static_cast<std::size_t>(dims_.y()) * v.z());
  }

  VoxelState state(const Vec3i& v) const { return grid_[flat_index(v)]; }

  VoxelState classify(const Vec3& p) const {
    const auto v = voxel_of(p);
    return v ? state(*v) : VoxelState::kUnknown;
  }

  void set_state(const Vec3i& v, VoxelState s) {
    VoxelState& cell = grid_[flat_index(v)];
    if (cell == s) return;
    bump_count(cell, -1);
    bump_count(s, +1);
    cell = s;
  }

  /// Visits voxels pierced by the segment [from, to] in traversal order
  /// (Amanatides-Woo). The visitor returns false to stop early. The walk is
  /// clipped to the grid; leaving the grid ends it.
  template <typename Visitor>
  void traverse(const Vec3& from, const Vec3& to, Visitor&& visit) const {
    const auto clip = clip_segment_to_box(from, to, bounds());
    if (!clip) return;
    const Vec3 d = to - from;
    const double seg_len = d.norm();
    if (seg_len < 1e-12) {
      if (auto v = voxel_of(from)) visit(*v);
      return;
    }
    double t = clip->first;
    const double t_end = clip->second;
    const Vec3 entry = from + t * d;

    Vec3i cell;
    for (int i = 0; i < 3; ++i) {
      cell[i] = static_cast<int>(std::floor((entry[i] - origin_[i]) / res_));
      cell[i] = std::clamp(cell[i], 0, dims_[i] - 1);
    }
    Vec3i step;
    Vec3 t_max, t_delta;
    for (int i = 0; i < 3; ++i) {
      if (d[i] > 1e-12) {
        step[i] = 1;
        const double next = origin_[i] + (cell[i] + 1) * res_;
        t_max[i] = (next - from[i]) / d[i];
        t_delta[i] = res_ / d[i];
      } else if (d[i] < -1e-12) {
        step[i] = -1;
        const double next = origin_[i] + cell[i] * res_;
        t_max[i] = (next - from[i]) / d[i];
        t_delta[i] = -res_ / d[i];
      } else {
        step[i] = 0;
        t_max[i] = std::numeric_limits<double>::infinity();
        t_delta[i] = std::numeric_limits<double>::infinity();
      }
    }
    while (true) {
      if (!visit(static_cast<const Vec3i&>(cell))) return;
      int axis = 0;
      if (t_max[1] < t_max[axis]) axis = 1;
      if (t_max[2] < t_max[axis]) axis = 2;
      if (t_max[axis] > t_end) return;
      cell[axis] += step[axis];
      if (cell[axis] < 0 || cell[axis] >= dims_[axis]) return;
      t_max[axis] += t_delta[axis];
    }
  }

  /// Folds a scan into the map. Voxels traversed before a surface become
  /// free, the surface voxel becomes occupied, and max-range rays carve free
  /// along their whole length. Occupied cells are never downgraded.
  void integrate_scan(const Scan& scan) {
    for (const ScanRay& ray : scan.rays) {
      const Vec3 end = scan.origin + ray.range * ray.direction;
      std::optional<Vec3i> hit_voxel;
      if (ray.hit) hit_voxel = voxel_of(end);
      traverse(scan.origin, end, [&](const Vec3i& v) {
        if (hit_voxel && v == *hit_voxel) return true;
        if (state(v) == VoxelState::kUnknown) set_state(v, VoxelState::kFree);
        return true;
      });
      if (hit_voxel) set_state(*hit_voxel, VoxelState::kOccupied);
    }
  }

  /// Registers a no-go box, clamped to the map extents. Re-adding an
  /// identical box is a no-op.
  void add_geofence(const Aabb& box) {
    const Aabb clamped = box.clamped_to(bounds());
    if (clamped.empty()) return;
    for (const Aabb& g : geofences_)
      if (g == clamped) return;
    geofences_.push_back(clamped);
  }

  const std::vector<Aabb>& geofences() const { return geofences_; }

  /// True when a robot box placed at `center` overlaps only free voxels and
  /// no geofence.
  bool position_admissible(const Vec3& center, const Vec3& half) const {
    const Aabb body = Aabb::from_center_half(center, half);
    for (const Aabb& g : geofences_)
      if (body.intersects(g)) return false;
    return box_all_free(body);
  }

  /// True when the robot box swept from a to b stays on free voxels and
  /// outside every geofence. Voxel overlap is checked by sampling box
  /// placements every res/2 along the segment; geofence contact is exact.
  bool segment_admissible(const Vec3& a, const Vec3& b,
                          const Vec3& half) const {
    for (const Aabb& g : geofences_)
      if (swept_box_intersects(a, b, half, g)) return false;
    const double len = (b - a).norm();
    const int steps = std::max(1, static_cast<int>(std::ceil(len / (0.5 * res_))));
    for (int s = 0; s <= steps; ++s) {
      const Vec3 c = a + (static_cast<double>(s) / steps) * (b - a);
      if (!box_all_free(Aabb::from_center_half(c, half))) return false;
    }
    return true;
  }

  /// Line-oriented text dump: a fixed header followed by one voxel per line.
  void export_text(std::ostream& os) const {
    os << "voxmap 1\n";
    os << "origin " << origin_.x() << " " << origin_.y() << " " << origin_.z()
       << "\n";
    os << "resolution " << res_ << "\n";
    os << "extents " << dims_.x() << " " << dims_.y() << " " << dims_.z()
       << "\n";
    Vec3i v;
    for (v.z() = 0; v.z() < dims_.z(); ++v.z())
      for (v.y() = 0; v.y() < dims_.y(); ++v.y())
        for (v.x() = 0; v.x() < dims_.x(); ++v.x())
          os << v.x() << " " << v.y() << " " << v.z() << " "
             << state_name(state(v)) << "\n";
  }

  static VoxelMap import_text(std::istream& is) {
    std::string line;
    auto next_line = [&](const char* what) {
      if (!std::getline(is, line))
        throw std::runtime_error(std::string("map import: missing ") + what);
      return std::istringstream(line);
    };
    {
      auto ss = next_line("magic");
      std::string magic;
      int version = 0;
      ss >> magic >> version;
      if (magic != "voxmap" || version != 1)
        throw std::runtime_error("map import: bad header '" + line + "'");
    }
    std::string key;
    Vec3 origin;
    double res = 0;
    Vec3i dims;
    {
      auto ss = next_line("origin");
      ss >> key >> origin.x() >> origin.y() >> origin.z();
      if (key != "origin" || ss.fail())
        throw std::runtime_error("map import: bad origin line");
    }
    {
      auto ss = next_line("resolution");
      ss >> key >> res;
      if (key != "resolution" || ss.fail())
        throw std::runtime_error("map import: bad resolution line");
    }
    {
      auto ss = next_line("extents");
      ss >> key >> dims.x() >> dims.y() >> dims.z();
      if (key != "extents" || ss.fail())
        throw std::runtime_error("map import: bad extents line");
    }
    VoxelMap map(origin, res, dims);
    std::size_t line_no = 4;
    while (std::getline(is, line)) {
      ++line_no;
      if (line.empty()) continue;
      std::istringstream ss(line);
      Vec3i v;
      std::string name;
      ss >> v.x() >> v.y() >> v.z() >> name;
      if (ss.fail() || !map.in_grid(v))
        throw std::runtime_error("map import: bad voxel at line " +
                                 std::to_string(line_no));
      map.set_state(v, parse_state(name, line_no));
    }
    return map;
  }

  static const char* state_name(VoxelState s) {
    switch (s) {
      case VoxelState::kFree: return "free";
      case VoxelState::kOccupied: return "occupied";
      default: return "unknown";
    }
  }

 private:
  static VoxelState parse_state(const std::string& name, std::size_t line_no) {
    if (name == "free") return VoxelState::kFree;
    if (name == "occupied") return VoxelState::kOccupied;
    if (name == "unknown") return VoxelState::kUnknown;
    throw std::runtime_error("map import: unknown state '" + name +
                             "' at line " + std::to_string(line_no));
  }

  void bump_count(VoxelState s, int delta) {
    switch (s) {
      case VoxelState::kUnknown: unknown_count_ += delta; break;
      case VoxelState::kFree: free_count_ += delta; break;
      case VoxelState::kOccupied: occupied_count_ += delta; break;
    }
  }

  bool box_all_free(const Aabb& body) const {
    const Aabb map_box = bounds();
    // Any part of the body outside the grid sits on unknown space.
    for (int i = 0; i < 3; ++i)
      if (body.min[i] < map_box.min[i] || body.max[i] > map_box.max[i])
        return false;
    Vec3i lo, hi;
    for (int i = 0; i < 3; ++i) {
      lo[i] = std::clamp(
          static_cast<int>(std::floor((body.min[i] - origin_[i]) / res_)), 0,
          dims_[i] - 1);
      hi[i] = std::clamp(
          static_cast<int>(std::floor((body.max[i] - origin_[i]) / res_)), 0,
          dims_[i] - 1);
    }
    Vec3i v;
    for (v.z() = lo.z(); v.z() <= hi.z(); ++v.z())
      for (v.y() = lo.y(); v.y() <= hi.y(); ++v.y())
        for (v.x() = lo.x(); v.x() <= hi.x(); ++v.x())
          if (state(v) != VoxelState::kFree) return false;
    return true;
  }

  Vec3 origin_;
  double res_;
  Vec3i dims_;
  std::vector<VoxelState> grid_;
  std::vector<Aabb> geofences_;
  std::size_t unknown_count_ = 0;
  std::size_t free_count_ = 0;
  std::size_t occupied_count_ = 0;
};

}  // namespace voxplan

#endif  // VOXPLAN_VOXEL_MAP_HPP
