/*
 * Licensed under the Apache License, Version 2.0 (the "License"); you may not
 * use this file except in compliance with the License. You may obtain a copy
 * of the License at http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
 * WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
 * License for the specific language governing permissions and limitations
 * under the License.
 */
#pragma once

#include <lfslab/types.hpp>

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

namespace lfslab::detail {

/// Static 3-d tree over a point set for nearest-neighbour queries.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::vector<Vector3d> points) : points_(std::move(points)) {
    index_.resize(points_.size());
    std::iota(index_.begin(), index_.end(), 0);
    build(0, index_.size(), 0);
  }

  std::size_t size() const { return points_.size(); }
  const Vector3d& point(std::size_t i) const { return points_[i]; }

  struct Hit {
    std::size_t index = std::numeric_limits<std::size_t>::max();
    double distance = std::numeric_limits<double>::infinity();
  };

  /// Nearest point to q among those for which skip(i) is false.
  template <typename Skip>
  Hit nearest(const Vector3d& q, Skip&& skip) const {
    Hit best;
    double best2 = std::numeric_limits<double>::infinity();
    search(q, 0, index_.size(), 0, skip, best, best2);
    best.distance = std::sqrt(best2);
    return best;
  }

  Hit nearest(const Vector3d& q) const {
    return nearest(q, [](std::size_t) { return false; });
  }

 private:
  void build(std::size_t lo, std::size_t hi, int axis) {
    if (hi - lo <= 1) return;
    const std::size_t mid = (lo + hi) / 2;
    std::nth_element(index_.begin() + lo, index_.begin() + mid, index_.begin() + hi,
                     [&](std::size_t a, std::size_t b) { return points_[a][axis] < points_[b][axis]; });
    build(lo, mid, (axis + 1) % 3);
    build(mid + 1, hi, (axis + 1) % 3);
  }

  template <typename Skip>
  void search(const Vector3d& q, std::size_t lo, std::size_t hi, int axis, Skip& skip, Hit& best,
              double& best2) const {
    if (lo >= hi) return;
    const std::size_t mid = (lo + hi) / 2;
    const std::size_t i = index_[mid];
    const double d2 = (points_[i] - q).squaredNorm();
    // Ties resolve to the lower index so results never depend on traversal.
    if ((d2 < best2 || (d2 == best2 && i < best.index)) && !skip(i)) {
      best2 = d2;
      best.index = i;
    }
    const double delta = q[axis] - points_[i][axis];
    const int next = (axis + 1) % 3;
    if (delta < 0) {
      search(q, lo, mid, next, skip, best, best2);
      if (delta * delta <= best2) search(q, mid + 1, hi, next, skip, best, best2);
    } else {
      search(q, mid + 1, hi, next, skip, best, best2);
      if (delta * delta <= best2) search(q, lo, mid, next, skip, best, best2);
    }
  }

  std::vector<Vector3d> points_;
  std::vector<std::size_t> index_;
};

}  // namespace lfslab::detail
