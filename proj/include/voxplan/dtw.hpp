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

#ifndef VOXPLAN_DTW_HPP
#define VOXPLAN_DTW_HPP

#include <algorithm>
#include <limits>
#include <vector>

#include "voxplan/geometry.hpp"

namespace voxplan {

/// Resamples a polyline at a fixed arc-length spacing. The first point is
/// kept and the final point is always appended, so endpoints survive.
inline std::vector<Vec3> resample_polyline(const std::vector<Vec3>& points,
                                           double spacing) {
  std::vector<Vec3> out;
  if (points.empty()) return out;
  out.push_back(points.front());
  if (points.size() == 1) return out;
  double carried = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    Vec3 prev = points[i - 1];
    const Vec3& next = points[i];
    double seg = (next - prev).norm();
    while (carried + seg >= spacing && seg > 1e-12) {
      const double need = spacing - carried;
      prev += (need / seg) * (next - prev);
      seg -= need;
      carried = 0.0;
      out.push_back(prev);
    }
    carried += seg;
  }
  if ((out.back() - points.back()).norm() > 1e-9) out.push_back(points.back());
  return out;
}

/// Dynamic-time-warping distance between two point sequences, normalized by
/// the combined sequence length so the value stays in meters no matter how
/// long the paths are.
inline double dtw_distance(const std::vector<Vec3>& a,
                           const std::vector<Vec3>& b) {
  if (a.empty() || b.empty()) return a.empty() && b.empty() ? 0.0 : 1e18;
  const std::size_t m = a.size(), n = b.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(n + 1, inf), cur(n + 1, inf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= m; ++i) {
    cur[0] = inf;
    for (std::size_t j = 1; j <= n; ++j) {
      const double d = (a[i - 1] - b[j - 1]).norm();
      cur[j] = d + std::min({prev[j], cur[j - 1], prev[j - 1]});
    }
    std::swap(prev, cur);
  }
  return prev[n] / static_cast<double>(m + n);
}

/// DTW distance between two paths after resampling both at `spacing`.
inline double path_similarity(const std::vector<Vec3>& a,
                              const std::vector<Vec3>& b, double spacing) {
  return dtw_distance(resample_polyline(a, spacing),
                      resample_polyline(b, spacing));
}

}  // namespace voxplan

#endif  // VOXPLAN_DTW_HPP
