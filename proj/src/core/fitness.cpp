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

#include "core/fitness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace mtpcr {

namespace {

void require_positive_epsilon(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw Error(ErrorCode::InvalidArgument, "inlier threshold must be positive and finite");
}

std::size_t count_outliers(const PointCloud& from, const PointCloud& to,
                           const RigidTransform& t, double radius_sq) {
  const KdTree& tree = to.index();
  std::size_t outliers = 0;
  for (const Vec3& p : from.points())
    if (!tree.any_within(t.apply(p), radius_sq)) ++outliers;
  return outliers;
}

}  // namespace

double consensus_loss(const PointCloud& p, const PointCloud& q,
                      const RigidTransform& t, double epsilon) {
  require_positive_epsilon(epsilon);
  const double radius_sq = epsilon * epsilon;
  const std::size_t outliers =
      count_outliers(p, q, t, radius_sq) + count_outliers(q, p, invert(t), radius_sq);
  return static_cast<double>(outliers) / static_cast<double>(p.size() + q.size());
}

double aiding_fitness(const PointCloud& p, const PointCloud& q,
                      const RigidTransform& t, double epsilon) {
  require_positive_epsilon(epsilon);
  const KdTree& tree = q.index();
  const std::size_t keep = (p.size() + 1) / 2;

  // Only the smallest `keep` distances matter. Resolve distances under a
  // growing bound until at least `keep` are known: every unresolved point is
  // then farther than every resolved one, so the kept set is exact.
  std::vector<Vec3> moved;
  moved.reserve(p.size());
  for (const Vec3& x : p.points()) moved.push_back(t.apply(x));
  std::vector<double> dist_sq;
  dist_sq.reserve(p.size());
  std::vector<std::size_t> pending(p.size());
  for (std::size_t i = 0; i < pending.size(); ++i) pending[i] = i;
  // Start the bound slightly above the median of a strided sample.
  std::vector<double> probe;
  const std::size_t stride = std::max<std::size_t>(1, moved.size() / 32);
  for (std::size_t i = 0; i < moved.size(); i += stride) probe.push_back(tree.nearest_squared(moved[i]));
  std::nth_element(probe.begin(), probe.begin() + probe.size() * 5 / 8, probe.end());
  double bound_sq = std::max(1.5 * probe[probe.size() * 5 / 8], epsilon * epsilon);
  while (dist_sq.size() < keep) {
    const bool last = !std::isfinite(bound_sq);
    std::size_t still = 0;
    for (std::size_t i : pending) {
      const double d = tree.nearest_squared(moved[i], bound_sq);
      if (d < bound_sq || last) dist_sq.push_back(d);
      else pending[still++] = i;
    }
    pending.resize(still);
    bound_sq = bound_sq < 1e150 ? bound_sq * 4.0 : std::numeric_limits<double>::infinity();
  }

  std::nth_element(dist_sq.begin(), dist_sq.begin() + (keep - 1), dist_sq.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < keep; ++i) sum += dist_sq[i];
  return sum / static_cast<double>(keep) / (epsilon * epsilon);
}

double loop_residual_for_slot(int task, const RigidTransform& candidate,
                              const RigidTransform& peer_next,
                              const RigidTransform& peer_after) {
  switch (task) {
    case 1: return loop_residual(candidate, peer_next, peer_after);
    case 2: return loop_residual(peer_after, candidate, peer_next);
    case 3: return loop_residual(peer_next, peer_after, candidate);
    default: throw Error(ErrorCode::InvalidArgument, "task index must be 1, 2 or 3");
  }
}

double original_fitness(const FitnessContext& ctx, const Pose6& candidate) {
  const RigidTransform t = pose_to_transform(candidate);
  const double local = consensus_loss(ctx.source, ctx.target, t, ctx.epsilon);
  if (ctx.alpha == 0.0) return local;
  const double loop = loop_residual_for_slot(ctx.task, t, ctx.peer_next, ctx.peer_after);
  return local + ctx.alpha * std::tanh(loop);
}

}  // namespace mtpcr
