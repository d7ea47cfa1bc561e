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

#include "core/kdtree.hpp"

#include <algorithm>
#include <cmath>

namespace mtpcr {

namespace {

constexpr std::uint32_t kLeafSize = 8;

// Lower bound on the squared distance from q to any point inside [lo, hi].
// Each per-axis gap is no larger than that point's coordinate difference and
// the terms are summed in the same order as squared_distance, so the bound
// holds in floating point too.
template <typename Box>
inline double box_distance(const double* q, const Box& lo, const Box& hi) {
  double g[3];
  for (int k = 0; k < 3; ++k) {
    const double below = lo[k] - q[k];
    const double above = q[k] - hi[k];
    g[k] = below > 0 ? below : (above > 0 ? above : 0.0);
  }
  return g[0] * g[0] + g[1] * g[1] + g[2] * g[2];
}

inline double squared_distance(const double* a, const double* b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace

KdTree::KdTree(std::span<const Vec3> points) {
  if (points.size() >= std::numeric_limits<std::uint32_t>::max())
    throw Error(ErrorCode::InvalidArgument, "too many points for the spatial index");
  if (points.empty()) return;
  std::vector<std::uint32_t> order(points.size());
  for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
  nodes_.reserve(2 * points.size() / kLeafSize + 1);
  build(0, static_cast<std::uint32_t>(order.size()), order, points);

  coords_.resize(3 * order.size());
  ids_ = order;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Vec3& p = points[order[i]];
    coords_[3 * i + 0] = p.x();
    coords_[3 * i + 1] = p.y();
    coords_[3 * i + 2] = p.z();
  }
}

std::uint32_t KdTree::build(std::uint32_t begin, std::uint32_t end,
                            std::vector<std::uint32_t>& order,
                            std::span<const Vec3> points) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  Vec3 lo = points[order[begin]], hi = lo;
  for (std::uint32_t i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points[order[i]]);
    hi = hi.cwiseMax(points[order[i]]);
  }
  nodes_[id].lo = {lo.x(), lo.y(), lo.z()};
  nodes_[id].hi = {hi.x(), hi.y(), hi.z()};
  if (end - begin <= kLeafSize) {
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double va = points[a][axis], vb = points[b][axis];
                     return va < vb || (va == vb && a < b);
                   });
  // Left holds [begin, mid) with coordinates <= split, right [mid, end) >= split.
  const double split = points[order[mid]][axis];

  const std::uint32_t left = build(begin, mid, order, points);
  const std::uint32_t right = build(mid, end, order, points);
  Node& node = nodes_[id];
  node.axis = static_cast<std::int8_t>(axis);
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

void KdTree::search(std::uint32_t index, const double* q, std::size_t exclude,
                    Best& best) const {
  const Node& node = nodes_[index];
  if (node.axis < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::size_t id = ids_[i];
      if (id == exclude) continue;
      const double d = squared_distance(q, &coords_[3 * i]);
      if (d < best.dist_sq || (d == best.dist_sq && id < best.id)) best = {d, id};
    }
    return;
  }
  const Node& l = nodes_[node.left];
  const Node& r = nodes_[node.right];
  const double dl = box_distance(q, l.lo, l.hi);
  const double dr = box_distance(q, r.lo, r.hi);
  // Equality is not pruned so that lower-index ties are still found.
  if (dl <= dr) {
    if (dl <= best.dist_sq) search(node.left, q, exclude, best);
    if (dr <= best.dist_sq) search(node.right, q, exclude, best);
  } else {
    if (dr <= best.dist_sq) search(node.right, q, exclude, best);
    if (dl <= best.dist_sq) search(node.left, q, exclude, best);
  }
}

bool KdTree::search_within(std::uint32_t index, const double* q,
                           double radius_sq) const {
  const Node& node = nodes_[index];
  if (node.axis < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i)
      if (squared_distance(q, &coords_[3 * i]) < radius_sq) return true;
    return false;
  }
  const Node& l = nodes_[node.left];
  const Node& r = nodes_[node.right];
  const double dl = box_distance(q, l.lo, l.hi);
  const double dr = box_distance(q, r.lo, r.hi);
  if (dl <= dr) {
    return (dl < radius_sq && search_within(node.left, q, radius_sq)) ||
           (dr < radius_sq && search_within(node.right, q, radius_sq));
  }
  return (dr < radius_sq && search_within(node.right, q, radius_sq)) ||
         (dl < radius_sq && search_within(node.left, q, radius_sq));
}

void KdTree::collect_within(std::uint32_t index, const double* q, double radius_sq,
                            std::vector<std::size_t>& out) const {
  const Node& node = nodes_[index];
  if (node.axis < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i)
      if (squared_distance(q, &coords_[3 * i]) < radius_sq) out.push_back(ids_[i]);
    return;
  }
  for (std::uint32_t child : {node.left, node.right}) {
    const Node& c = nodes_[child];
    if (box_distance(q, c.lo, c.hi) < radius_sq) collect_within(child, q, radius_sq, out);
  }
}

std::vector<std::size_t> KdTree::radius_search(const Vec3& query, double radius_sq) const {
  std::vector<std::size_t> out;
  if (nodes_.empty()) return out;
  const double q[3] = {query.x(), query.y(), query.z()};
  collect_within(0, q, radius_sq, out);
  std::sort(out.begin(), out.end());
  return out;
}

NNResult KdTree::nearest(const Vec3& query, std::size_t exclude) const {
  Best best{std::numeric_limits<double>::infinity(), kNone};
  if (!nodes_.empty()) {
    const double q[3] = {query.x(), query.y(), query.z()};
    search(0, q, exclude, best);
  }
  if (best.id == kNone) return {kNone, std::numeric_limits<double>::infinity()};
  return {best.id, std::sqrt(best.dist_sq)};
}

double KdTree::nearest_squared(const Vec3& query, double bound_sq) const {
  Best best{bound_sq, kNone};
  if (!nodes_.empty()) {
    const double q[3] = {query.x(), query.y(), query.z()};
    if (box_distance(q, nodes_[0].lo, nodes_[0].hi) < bound_sq) search(0, q, kNone, best);
  }
  if (best.id == kNone || !(best.dist_sq < bound_sq))
    return std::numeric_limits<double>::infinity();
  return best.dist_sq;
}

bool KdTree::any_within(const Vec3& query, double radius_sq) const {
  if (nodes_.empty()) return false;
  const double q[3] = {query.x(), query.y(), query.z()};
  return box_distance(q, nodes_[0].lo, nodes_[0].hi) < radius_sq &&
         search_within(0, q, radius_sq);
}

}  // namespace mtpcr
