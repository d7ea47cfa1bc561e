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

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include <unistd.h>

#include "core/geometry.hpp"
#include "core/pointcloud.hpp"
#include "core/rng.hpp"
#include "oracles.hpp"

namespace test {

using namespace mtpcr;
constexpr double kPi = std::numbers::pi;

inline std::vector<oracle::P3> plain(const PointCloud& c) {
  std::vector<oracle::P3> out;
  for (const Vec3& p : c.points()) out.push_back({p.x(), p.y(), p.z()});
  return out;
}

inline oracle::M4 plain(const RigidTransform& t) {
  oracle::M4 m{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m[i][j] = t.matrix()(i, j);
  return m;
}

inline oracle::M4 plain(const Pose6& p) {
  return oracle::pose(p[0], p[1], p[2], p[3], p[4], p[5]);
}

inline double max_abs_diff(const oracle::M4& a, const oracle::M4& b) {
  double m = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m = std::max(m, std::abs(a[i][j] - b[i][j]));
  return m;
}

inline Pose6 random_pose(Rng& rng, double max_ry = kPi, double shift = 2.0) {
  return Pose6(rng.uniform(-kPi, kPi), rng.uniform(-max_ry, max_ry), rng.uniform(-kPi, kPi),
               rng.uniform(-shift, shift), rng.uniform(-shift, shift),
               rng.uniform(-shift, shift));
}

inline RigidTransform random_transform(Rng& rng, double shift = 2.0) {
  return pose_to_transform(random_pose(rng, kPi, shift));
}

inline PointCloud random_cloud(Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < n; ++i)
    pts.emplace_back(rng.uniform(-scale, scale), rng.uniform(-scale, scale),
                     rng.uniform(-scale, scale));
  return PointCloud(std::move(pts));
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("mtpcr_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter()++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::filesystem::path path_;
};

}  // namespace test
