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

#ifndef VOXPLAN_WORLD_HPP
#define VOXPLAN_WORLD_HPP

#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "voxplan/artifact.hpp"
#include "voxplan/geometry.hpp"
#include "voxplan/graph.hpp"
#include "voxplan/voxel_map.hpp"

namespace voxplan {

class WorldFormatError : public std::runtime_error {
 public:
  explicit WorldFormatError(const std::string& what)
      : std::runtime_error("world file: " + what) {}
};

/// Ground truth: free space is the union of `free_boxes`, everything else is
/// solid. Non-traversable boxes annotate terrain a legged robot must not
/// enter; they are not obstacles for range sensors.
struct World {
  Aabb bounds;
  std::vector<Aabb> free_boxes;
  std::vector<Aabb> non_traversable;
  std::vector<Artifact> artifacts;
  RobotConfig start;
  Vec3 home = Vec3::Zero();

  bool in_free_space(const Vec3& p) const {
    for (const Aabb& b : free_boxes)
      if (b.contains(p)) return true;
    return false;
  }

  bool in_non_traversable(const Vec3& p) const {
    for (const Aabb& b : non_traversable)
      if (b.contains(p)) return true;
    return false;
  }
};

struct RobotModel {
  RobotClass robot_class = RobotClass::kAerial;
  double v_ref = 1.0;             // m/s
  double yaw_rate_max = 1.5;      // rad/s, aerial heading constraint
  double reverse_distance = 0.5;  // m, blocked-recovery backoff
  double endurance_s = 600.0;
  double localization_sigma = 0.0;  // m / sqrt(s), 0 = ideal localization
  Vec3 box_half = Vec3(0.2, 0.2, 0.15);
};

namespace detail {

inline Vec3 parse_vec3(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3)
    throw WorldFormatError(field + " must be an array of 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline Aabb parse_box(const nlohmann::json& j, const std::string& field) {
  if (!j.is_object() || !j.contains("min") || !j.contains("max"))
    throw WorldFormatError(field + " must be an object with min/max");
  Aabb box{parse_vec3(j.at("min"), field + ".min"),
           parse_vec3(j.at("max"), field + ".max")};
  if (box.empty()) throw WorldFormatError(field + " has min > max");
  return box;
}

inline void reject_unknown_keys(const nlohmann::json& j,
                                const std::set<std::string>& allowed,
                                const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      throw WorldFormatError("unknown key '" + key + "' in " + where);
}

}  // namespace detail

/// Parses and validates a world description. See worlds/ for the schema:
/// {bounds, free_boxes, non_traversable, artifacts, start, home}.
inline World parse_world(const nlohmann::json& j) {
  detail::reject_unknown_keys(
      j, {"bounds", "free_boxes", "non_traversable", "artifacts", "start",
          "home"},
      "world");
  World w;
  if (!j.contains("bounds")) throw WorldFormatError("missing 'bounds'");
  w.bounds = detail::parse_box(j.at("bounds"), "bounds");

  if (!j.contains("free_boxes") || !j.at("free_boxes").is_array() ||
      j.at("free_boxes").empty())
    throw WorldFormatError("'free_boxes' must be a non-empty array");
  int idx = 0;
  for (const auto& b : j.at("free_boxes"))
    w.free_boxes.push_back(
        detail::parse_box(b, "free_boxes[" + std::to_string(idx++) + "]"));

  idx = 0;
  for (const auto& b : j.value("non_traversable", nlohmann::json::array()))
    w.non_traversable.push_back(detail::parse_box(
        b, "non_traversable[" + std::to_string(idx++) + "]"));

  idx = 0;
  std::set<std::string> seen_ids;
  for (const auto& a : j.value("artifacts", nlohmann::json::array())) {
    const std::string where = "artifacts[" + std::to_string(idx) + "]";
    detail::reject_unknown_keys(a, {"id", "class", "position"}, where);
    if (!a.contains("class") || !a.contains("position"))
      throw WorldFormatError(where + " needs class and position");
    Artifact art;
    art.id = a.value("id", std::to_string(idx));
    art.cls = artifact_class_from_name(a.at("class").get<std::string>());
    art.position = detail::parse_vec3(a.at("position"), where + ".position");
    if (!w.bounds.contains(art.position))
      throw WorldFormatError(where + " position outside world bounds");
    if (!seen_ids.insert(art.id).second)
      throw WorldFormatError("duplicate artifact id '" + art.id + "'");
    w.artifacts.push_back(art);
    ++idx;
  }

  if (!j.contains("start")) throw WorldFormatError("missing 'start'");
  const auto& start = j.at("start");
  detail::reject_unknown_keys(start, {"position", "heading"}, "start");
  w.start.position = detail::parse_vec3(start.at("position"), "start.position");
  w.start.heading = wrap_angle(start.value("heading", 0.0));
  if (!w.in_free_space(w.start.position))
    throw WorldFormatError("start position is not in free space");

  if (!j.contains("home")) throw WorldFormatError("missing 'home'");
  w.home = detail::parse_vec3(j.at("home"), "home");
  if (!w.in_free_space(w.home))
    throw WorldFormatError("home position is not in free space");
  return w;
}

inline World load_world(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw WorldFormatError("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw WorldFormatError(std::string("parse error: ") + e.what());
  }
  return parse_world(j);
}

/// Advances a pose along a planned path at constant speed. Heading follows
/// the per-vertex assignment: legged robots face the active segment, aerial
/// headings interpolate between the clipped vertex headings.
class PathFollower {
 public:
  PathFollower() = default;
  PathFollower(PlannedPath path, RobotClass robot_class)
      : path_(std::move(path)), robot_class_(robot_class) {
    seg_lengths_.reserve(
        path_.vertices.empty() ? 0 : path_.vertices.size() - 1);
    total_ = 0.0;
    for (std::size_t i = 1; i < path_.vertices.size(); ++i) {
      const double len = (path_.vertices[i].config.position -
                          path_.vertices[i - 1].config.position)
                             .norm();
      seg_lengths_.push_back(len);
      total_ += len;
    }
  }

  const PlannedPath& path() const { return path_; }
  bool complete() const { return progress_ >= total_ - 1e-9; }
  double progress() const { return progress_; }
  double remaining() const { return std::max(0.0, total_ - progress_); }

  /// Current segment direction of motion (unit), or zero when complete.
  Vec3 direction() const {
    double s = progress_;
    for (std::size_t i = 0; i < seg_lengths_.size(); ++i) {
      if (s <= seg_lengths_[i] + 1e-12) {
        if (seg_lengths_[i] < 1e-12) continue;
        return (path_.vertices[i + 1].config.position -
                path_.vertices[i].config.position) /
               seg_lengths_[i];
      }
      s -= seg_lengths_[i];
    }
    return Vec3::Zero();
  }

  /// Moves by at most `dist` along the polyline; returns the distance
  /// actually covered.
  double advance(double dist) {
    const double before = progress_;
    progress_ = std::min(total_, progress_ + dist);
    return progress_ - before;
  }

  /// Moves backward along the polyline (blocked recovery).
  double reverse(double dist) {
    const double before = progress_;
    progress_ = std::max(0.0, progress_ - dist);
    return before - progress_;
  }

  RobotConfig pose_at(double s) const {
    if (path_.vertices.empty()) return {};
    RobotConfig out = path_.vertices.front().config;
    if (path_.vertices.size() == 1) return out;
    s = std::clamp(s, 0.0, total_);
    for (std::size_t i = 0; i < seg_lengths_.size(); ++i) {
      if (s <= seg_lengths_[i] + 1e-12) {
        const auto& a = path_.vertices[i].config;
        const auto& b = path_.vertices[i + 1].config;
        const double f =
            seg_lengths_[i] < 1e-12 ? 1.0 : s / seg_lengths_[i];
        out.position = a.position + f * (b.position - a.position);
        if (robot_class_ == RobotClass::kLegged) {
          out.heading = a.heading;
        } else {
          out.heading = wrap_angle(a.heading +
                                   f * wrap_angle(b.heading - a.heading));
        }
        out.box_half = a.box_half;
        return out;
      }
      s -= seg_lengths_[i];
    }
    return path_.vertices.back().config;
  }

  RobotConfig current_pose() const { return pose_at(progress_); }

  /// Path vertices already passed, as positions (used when the executed
  /// prefix is folded into the global graph).
  std::vector<Vec3> executed_prefix() const {
    std::vector<Vec3> out;
    out.push_back(path_.vertices.front().config.position);
    double s = progress_;
    for (std::size_t i = 0; i < seg_lengths_.size() && s > 1e-9; ++i) {
      if (s >= seg_lengths_[i] - 1e-9)
        out.push_back(path_.vertices[i + 1].config.position);
      s -= seg_lengths_[i];
    }
    return out;
  }

 private:
  PlannedPath path_;
  RobotClass robot_class_ = RobotClass::kAerial;
  std::vector<double> seg_lengths_;
  double total_ = 0.0;
  double progress_ = 0.0;
};

inline constexpr double kLookaheadDistance = 0.30;  // m

/// Legged traversability guard: projects poses up to 30 cm ahead along the
/// motion direction and reports the first one inside a non-traversable
/// region. Aerial robots are never blocked.
inline std::optional<Vec3> traversability_lookahead(const RobotModel& model,
                                                    const Vec3& position,
                                                    const Vec3& direction,
                                                    const World& world) {
  if (model.robot_class != RobotClass::kLegged) return std::nullopt;
  if (direction.norm() < 1e-9) return std::nullopt;
  const Vec3 dir = direction.normalized();
  for (double ahead = 0.0; ahead <= kLookaheadDistance + 1e-9; ahead += 0.05) {
    const Vec3 p = position + ahead * dir;
    if (world.in_non_traversable(p)) return p;
  }
  return std::nullopt;
}

/// Random-walk localization error: per-step Gaussian increments with std
/// sigma * sqrt(dt), so positional error variance grows linearly in time.
class LocalizationNoise {
 public:
  LocalizationNoise(double sigma, std::uint64_t seed)
      : sigma_(sigma), rng_(seed) {}

  void step(double dt) {
    if (sigma_ <= 0.0) return;
    std::normal_distribution<double> inc(0.0, sigma_ * std::sqrt(dt));
    offset_ += Vec3(inc(rng_), inc(rng_), inc(rng_));
  }

  const Vec3& offset() const { return offset_; }

  RobotConfig reported(const RobotConfig& true_pose) const {
    RobotConfig out = true_pose;
    out.position += offset_;
    return out;
  }

 private:
  double sigma_;
  Vec3 offset_ = Vec3::Zero();
  std::mt19937_64 rng_;
};

}  // namespace voxplan

#endif  // VOXPLAN_WORLD_HPP
