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

#include "core/pointcloud.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "core/rng.hpp"

namespace mtpcr {

struct PointCloud::Cache {
  std::once_flag index_once;
  KdTree index;
  std::once_flag mean_nn_once;
  double mean_nn = 0.0;
};

PointCloud::PointCloud(std::vector<Vec3> points, Vec3 centroid_offset)
    : points_(std::move(points)),
      centroid_offset_(std::move(centroid_offset)),
      cache_(std::make_shared<Cache>()) {
  if (points_.empty()) throw Error(ErrorCode::EmptyCloud, "point cloud has no points");
  for (const Vec3& p : points_)
    if (!p.allFinite())
      throw Error(ErrorCode::NonFiniteCoordinate, "point cloud has a non-finite coordinate");
}

Vec3 PointCloud::centroid() const {
  Vec3 sum = Vec3::Zero();
  for (const Vec3& p : points_) sum += p;
  return sum / static_cast<double>(points_.size());
}

Vec3 PointCloud::extent() const {
  Vec3 lo = points_.front(), hi = lo;
  for (const Vec3& p : points_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return hi - lo;
}

const KdTree& PointCloud::index() const {
  std::call_once(cache_->index_once, [this] { cache_->index = KdTree(points_); });
  return cache_->index;
}

double PointCloud::mean_nn() const {
  if (points_.size() < 2)
    throw Error(ErrorCode::InvalidArgument,
                "mean nearest-neighbour distance needs at least two points");
  std::call_once(cache_->mean_nn_once, [this] {
    const KdTree& tree = index();
    double sum = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i)
      sum += tree.nearest(points_[i], i).distance;
    cache_->mean_nn = sum / static_cast<double>(points_.size());
  });
  return cache_->mean_nn;
}

Decentralized decentralize(const PointCloud& cloud) {
  const Vec3 c = cloud.centroid();
  std::vector<Vec3> shifted(cloud.points().begin(), cloud.points().end());
  for (Vec3& p : shifted) p -= c;
  return {PointCloud(std::move(shifted), cloud.centroid_offset() + c), c};
}

NNResult nearest(const PointCloud& cloud, const Vec3& query) {
  return cloud.nearest(query);
}

double mean_nn_distance(const PointCloud& cloud) { return cloud.mean_nn(); }

double adaptive_threshold(const PointCloud& c1, const PointCloud& c2,
                          const PointCloud& c3) {
  const double d = (c1.mean_nn() + c2.mean_nn() + c3.mean_nn()) / 3.0;
  return std::sqrt(2.0) / 2.0 * d;
}

PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& t) {
  std::vector<Vec3> moved;
  moved.reserve(cloud.size());
  for (const Vec3& p : cloud.points()) moved.push_back(t.apply(p));
  return PointCloud(std::move(moved), cloud.centroid_offset());
}

PointCloud subsample(const PointCloud& cloud, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "sample ratio must lie in (0, 1]");
  const std::size_t n = cloud.size();
  // The small relative slack keeps products like 0.1 * 30 from rounding up.
  auto k = static_cast<std::size_t>(
      std::ceil(ratio * static_cast<double>(n) * (1.0 - 1e-12)));
  k = std::clamp<std::size_t>(k, 1, n);
  Rng rng(seed);
  std::vector<std::size_t> picked = rng.choose(n, k);
  std::sort(picked.begin(), picked.end());
  std::vector<Vec3> out;
  out.reserve(k);
  for (std::size_t i : picked) out.push_back(cloud[i]);
  return PointCloud(std::move(out), cloud.centroid_offset());
}

}  // namespace mtpcr
