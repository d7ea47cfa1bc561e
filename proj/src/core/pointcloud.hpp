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

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "core/geometry.hpp"
#include "core/kdtree.hpp"

namespace mtpcr {

/// Immutable point set with a lazily built nearest-neighbour index and a
/// lazily computed mean nearest-neighbour spacing. Copies share both caches.
class PointCloud {
 public:
  /// Throws EmptyCloud on no points and NonFiniteCoordinate on inf/nan.
  explicit PointCloud(std::vector<Vec3> points, Vec3 centroid_offset = Vec3::Zero());

  std::span<const Vec3> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  const Vec3& operator[](std::size_t i) const { return points_[i]; }

  /// Accumulated translation removed by decentralize(); zero for raw clouds.
  const Vec3& centroid_offset() const { return centroid_offset_; }

  Vec3 centroid() const;
  /// Axis-aligned bounding box edge lengths.
  Vec3 extent() const;

  const KdTree& index() const;
  NNResult nearest(const Vec3& query) const { return index().nearest(query); }

  /// Mean distance from each point to its nearest other point. Throws
  /// InvalidArgument on a single-point cloud.
  double mean_nn() const;

 private:
  struct Cache;

  std::vector<Vec3> points_;
  Vec3 centroid_offset_;
  std::shared_ptr<Cache> cache_;
};

struct Decentralized {
  PointCloud cloud;
  Vec3 offset;  // centroid that was subtracted
};

Decentralized decentralize(const PointCloud& cloud);

NNResult nearest(const PointCloud& cloud, const Vec3& query);

double mean_nn_distance(const PointCloud& cloud);

/// (sqrt(2)/2) * mean of the three clouds' mean nearest-neighbour spacings.
double adaptive_threshold(const PointCloud& c1, const PointCloud& c2,
                          const PointCloud& c3);

PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& t);

/// Uniform subset of ceil(ratio * N) points without replacement, kept in
/// original order. ratio must lie in (0, 1].
PointCloud subsample(const PointCloud& cloud, double ratio, std::uint64_t seed);

enum class PlyFormat { Ascii, BinaryLittleEndian };

/// Reads vertex x/y/z from an ascii or binary_little_endian PLY file. Other
/// vertex properties and other elements are ignored.
PointCloud load_ply(const std::filesystem::path& path);

/// Writes x/y/z only. Ascii output uses 17 significant digits, so values
/// round-trip bit-exactly; binary output stores float64.
void save_ply(const PointCloud& cloud, const std::filesystem::path& path,
              PlyFormat format = PlyFormat::Ascii);

}  // namespace mtpcr
