/*
Copyright 2026 The MTPCR Authors
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
you may obtain a copy of the License at

                http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#pragma once

#include <cstddef>
#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "core/geometry.hpp"

namespace mtpcr {

struct NNResult {
  std::size_t index = 0;
  double distance = 0.0;
};

// Exact nearest-neighbour index over a fixed set of 3D points.
//
// Points are copied into bucket order; queries never modify the tree, so any
// number of threads may query concurrently. Distances are compared squared,
// computed as dx*dx + dy*dy + dz*dz in that order. Ties on distance go to the
// lowest original point index.
class KdTree {
 public:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  KdTree() = default;
  explicit KdTree(std::span<const Vec3> points);

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }

  /// Nearest point; `exclude` (an original index) is skipped when set.
  /// Returns index kNone on an empty tree (or a singleton with its point
  /// excluded).
  NNResult nearest(const Vec3& query, std::size_t exclude = kNone) const;

  /// Squared distance to the nearest point (+inf on an empty tree). With a
  /// finite `bound_sq`, returns +inf unless some point is strictly closer than
  /// the bound; any finite result is exact.
  double nearest_squared(const Vec3& query,
                         double bound_sq = std::numeric_limits<double>::infinity()) const;

  /// True iff some point lies at squared distance strictly below `radius_sq`.
  bool any_within(const Vec3& query, double radius_sq) const;

  /// Original indices of all points strictly within `radius_sq`, ascending.
  std::vector<std::size_t> radius_search(const Vec3& query, double radius_sq) const;

 private:
  struct Node {
    // Leaf: [begin, end) into the bucket arrays. Inner: children and split.
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    double split = 0.0;
    std::int8_t axis = -1;  // -1 marks a leaf
    std::array<double, 3> lo{};  // bounding box of the node's points
    std::array<double, 3> hi{};
  };

  struct Best {
    double dist_sq;
    std::size_t id;
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end,
                      std::vector<std::uint32_t>& order,
                      std::span<const Vec3> points);
  void search(std::uint32_t node, const double* q, std::size_t exclude,
              Best& best) const;
  bool search_within(std::uint32_t node, const double* q, double radius_sq) const;
  void collect_within(std::uint32_t node, const double* q, double radius_sq,
                      std::vector<std::size_t>& out) const;

  std::vector<Node> nodes_;
  std::vector<double> coords_;  // xyz interleaved, bucket order
  std::vector<std::uint32_t> ids_;
};

}  // namespace mtpcr
