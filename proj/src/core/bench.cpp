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

#include "core/bench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <vector>

#include "core/fitness.hpp"
#include "core/rng.hpp"

namespace mtpcr {

namespace {

constexpr std::size_t kMinViewPoints = 16;

Vec3 random_unit(Rng& rng) {
  const double z = rng.uniform(-1.0, 1.0);
  const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

RigidTransform random_pose(Rng& rng, double angle_limit, double shift_limit) {
  const double rx = rng.uniform(-angle_limit, angle_limit);
  const double ry = rng.uniform(-angle_limit, angle_limit);
  const double rz = rng.uniform(-angle_limit, angle_limit);
  const double tx = rng.uniform(-shift_limit, shift_limit);
  const double ty = rng.uniform(-shift_limit, shift_limit);
  const double tz = rng.uniform(-shift_limit, shift_limit);
  return pose_to_transform(Pose6(rx, ry, rz, tx, ty, tz));
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Overlap bookkeeping over the base cloud: a view is the set of base points
// whose projection on the view's cut direction is <= its cut position.
class ViewCutter {
 public:
  ViewCutter(const PointCloud& base, double epsilon) : n_(base.size()) {
    for (int k = 0; k < 3; ++k) {
      const double theta = 2.0 * std::numbers::pi * k / 3.0;
      const Vec3 dir = Vec3(std::cos(theta), std::sin(theta), 0.25).normalized();
      projections_[k].resize(n_);
      for (std::size_t i = 0; i < n_; ++i) projections_[k][i] = dir.dot(base[i]);
      const auto [lo, hi] = std::minmax_element(projections_[k].begin(), projections_[k].end());
      range_[k] = {*lo, *hi};
      cut_[k] = *hi;
    }
    neighbours_.resize(n_);
    const double radius_sq = epsilon * epsilon;
    for (std::size_t i = 0; i < n_; ++i)
      neighbours_[i] = base.index().radius_search(base[i], radius_sq);
  }

  bool kept(int view, std::size_t i) const { return projections_[view][i] <= cut_[view]; }

  std::size_t view_size(int view) const {
    std::size_t count = 0;
    for (std::size_t i = 0; i < n_; ++i) count += kept(view, i) ? 1 : 0;
    return count;
  }

  double overlap(int source, int target) const {
    std::size_t in_source = 0, matched = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (!kept(source, i)) continue;
      ++in_source;
      for (std::size_t j : neighbours_[i]) {
        if (kept(target, j)) {
          ++matched;
          break;
        }
      }
    }
    return in_source == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(in_source);
  }

  // overlap(source -> target) grows with the target's cut position; bisect it.
  void fit_cut(int source, int target, double goal) {
    double lo = range_[target].first, hi = range_[target].second;
    cut_[target] = hi;
    if (overlap(source, target) <= goal) return;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      cut_[target] = mid;
      const bool enough = overlap(source, target) >= goal && view_size(target) >= kMinViewPoints;
      (enough ? hi : lo) = mid;
    }
    cut_[target] = hi;
  }

  std::vector<Vec3> view_points(int view, const PointCloud& base) const {
    std::vector<Vec3> out;
    for (std::size_t i = 0; i < n_; ++i)
      if (kept(view, i)) out.push_back(base[i]);
    return out;
  }

 private:
  std::size_t n_;
  std::array<std::vector<double>, 3> projections_;
  std::array<std::pair<double, double>, 3> range_;
  std::array<double, 3> cut_{};
  std::vector<std::vector<std::size_t>> neighbours_;
};

std::string format_ratios(const std::array<double, 3>& r) {
  std::ostringstream os;
  os << "(" << r[0] << ", " << r[1] << ", " << r[2] << ")";
  return os.str();
}

}  // namespace

PointCloud make_base_cloud(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "base cloud needs at least two points");
  // A lopsided animal-like figure: body, head, two unequal ears, tail and one
  // foot, each an ellipsoid. Points inside another part are rejected so only
  // the outer surface is sampled.
  struct Part {
    Vec3 center;
    Vec3 radii;
    Mat3 rotation;
  };
  const auto tilt = [](double about_x, double about_y) {
    return euler_to_rotation(about_x, about_y, 0.0);
  };
  const std::vector<Part> parts{
      {{0.0, 0.0, 0.0}, {1.0, 0.68, 0.6}, Mat3::Identity()},
      {{0.95, 0.1, 0.55}, {0.42, 0.36, 0.38}, Mat3::Identity()},
      {{1.05, 0.28, 1.05}, {0.1, 0.07, 0.42}, tilt(-0.35, 0.2)},
      {{1.15, -0.12, 0.95}, {0.09, 0.06, 0.3}, tilt(0.5, 0.45)},
      {{-1.02, -0.05, 0.25}, {0.2, 0.2, 0.2}, Mat3::Identity()},
      {{0.45, 0.42, -0.55}, {0.38, 0.2, 0.14}, tilt(0.0, 0.3)},
  };
  std::vector<double> weights;
  for (const Part& p : parts) {
    // Knud Thomsen's ellipsoid surface approximation.
    const double a = std::pow(p.radii.x(), 1.6), b = std::pow(p.radii.y(), 1.6),
                 c = std::pow(p.radii.z(), 1.6);
    weights.push_back(std::pow((a * b + a * c + b * c) / 3.0, 1.0 / 1.6));
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  auto inside = [&](const Vec3& x, std::size_t skip) {
    for (std::size_t k = 0; k < parts.size(); ++k) {
      if (k == skip) continue;
      const Vec3 local = parts[k].rotation.transpose() * (x - parts[k].center);
      if (local.cwiseQuotient(parts[k].radii).squaredNorm() < 1.0) return true;
    }
    return false;
  };

  Rng rng(seed);
  std::vector<Vec3> points;
  points.reserve(n);
  while (points.size() < n) {
    double pick = rng.uniform(0.0, total);
    std::size_t k = 0;
    while (k + 1 < parts.size() && pick >= weights[k]) pick -= weights[k++];
    const Part& part = parts[k];
    const Vec3 x = part.center + part.rotation * part.radii.cwiseProduct(random_unit(rng));
    if (!inside(x, k)) points.push_back(x);
  }
  return PointCloud(std::move(points));
}

double measure_overlap(const PointCloud& source, const PointCloud& target,
                       const RigidTransform& t, double epsilon) {
  const double radius_sq = epsilon * epsilon;
  std::size_t matched = 0;
  for (const Vec3& p : source.points())
    if (target.index().any_within(t.apply(p), radius_sq)) ++matched;
  return static_cast<double>(matched) / static_cast<double>(source.size());
}

SyntheticProblem generate(const PointCloud& base, const std::array<double, 3>& overlaps,
                          double sigma, std::uint64_t seed, const GenerateOptions& options) {
  for (double o : overlaps)
    if (!(o > 0.0 && o <= 1.0))
      throw Error(ErrorCode::InvalidArgument, "overlap ratios must lie in (0, 1]");
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw Error(ErrorCode::InvalidArgument, "noise sigma must be non-negative");

  const PointCloud centered = decentralize(base).cloud;
  const double epsilon = adaptive_threshold(centered, centered, centered);
  ViewCutter cutter(centered, epsilon);

  std::array<double, 3> achieved{};
  auto measure = [&] {
    for (int p = 0; p < 3; ++p) achieved[p] = cutter.overlap(p, (p + 1) % 3);
  };
  for (int round = 0; round < 50; ++round) {
    for (int p = 0; p < 3; ++p) cutter.fit_cut(p, (p + 1) % 3, overlaps[p]);
    measure();
    bool done = true;
    for (int p = 0; p < 3; ++p) done = done && std::abs(achieved[p] - overlaps[p]) <= 0.005;
    if (done) break;
  }
  measure();
  for (int p = 0; p < 3; ++p) {
    if (std::abs(achieved[p] - overlaps[p]) > options.overlap_tolerance ||
        cutter.view_size(p) < kMinViewPoints)
      throw Error(ErrorCode::Generation, "cannot reach requested overlaps " +
                                             format_ratios(overlaps) + "; achieved " +
                                             format_ratios(achieved));
  }

  Rng rng(seed);
  const double angle_limit = options.full_range ? std::numbers::pi : std::numbers::pi / 2.0;
  const double shift_limit = 0.25 * centered.extent().maxCoeff();
  const std::array<RigidTransform, 3> view_pose{
      RigidTransform(), random_pose(rng, angle_limit, shift_limit),
      random_pose(rng, angle_limit, shift_limit)};

  std::array<std::vector<Vec3>, 3> local;
  for (int k = 0; k < 3; ++k) {
    const RigidTransform to_local = invert(view_pose[k]);
    for (const Vec3& p : cutter.view_points(k, centered)) local[k].push_back(to_local.apply(p));
  }

  const RigidTransform t12 = compose(invert(view_pose[1]), view_pose[0]);
  const RigidTransform t23 = compose(invert(view_pose[2]), view_pose[1]);
  const RigidTransform t31 = combine_for_task(3, t12, t23);

  SyntheticProblem out{
      RegistrationProblem{{PointCloud(std::move(local[0])), PointCloud(std::move(local[1])),
                           PointCloud(std::move(local[2]))},
                          std::array<RigidTransform, 3>{t12, t23, t31}},
      overlaps, achieved, sigma, seed};
  if (sigma > 0.0)
    for (std::size_t k = 0; k < 3; ++k)
      out.problem.clouds[k] = add_noise(out.problem.clouds[k], sigma, mix_seed(seed, 10 + k));
  return out;
}

PointCloud add_noise(const PointCloud& cloud, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw Error(ErrorCode::InvalidArgument, "noise sigma must be non-negative");
  if (sigma == 0.0) return cloud;
  double scale = 0.0;
  for (const Vec3& p : cloud.points()) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  if (scale == 0.0) scale = 1.0;
  Rng rng(seed);
  std::vector<Vec3> noisy;
  noisy.reserve(cloud.size());
  for (const Vec3& p : cloud.points()) {
    Vec3 q = p / scale;
    for (int k = 0; k < 3; ++k) q[k] += rng.normal(0.0, sigma);
    noisy.push_back(q * scale);
  }
  return PointCloud(std::move(noisy), cloud.centroid_offset());
}

Metrics evaluate(const std::array<RigidTransform, 3>& estimate,
                 const std::array<RigidTransform, 3>& ground_truth) {
  return {rotation_error(estimate, ground_truth), translation_error(estimate, ground_truth),
          loop_residual(estimate[0], estimate[1], estimate[2])};
}

Metrics evaluate(const RunReport& report, const SyntheticProblem& problem) {
  return evaluate(report.transforms, problem.ground_truth());
}

NNResult brute_force_nn(const PointCloud& cloud, const Vec3& query) {
  NNResult best{0, std::numeric_limits<double>::infinity()};
  double best_sq = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double dx = query.x() - cloud[i].x();
    const double dy = query.y() - cloud[i].y();
    const double dz = query.z() - cloud[i].z();
    const double d = dx * dx + dy * dy + dz * dz;
    if (d < best_sq) {
      best_sq = d;
      best.index = i;
    }
  }
  best.distance = std::sqrt(best_sq);
  return best;
}

double brute_force_consensus(const PointCloud& p, const PointCloud& q,
                             const RigidTransform& t, double epsilon) {
  const double radius_sq = epsilon * epsilon;
  auto outliers = [&](const PointCloud& from, const PointCloud& to, const Mat4& m) {
    std::size_t count = 0;
    for (const Vec3& x : from.points()) {
      const Vec3 y = m.topLeftCorner<3, 3>() * x + m.topRightCorner<3, 1>();
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& z : to.points()) {
        const double dx = y.x() - z.x(), dy = y.y() - z.y(), dz = y.z() - z.z();
        best = std::min(best, dx * dx + dy * dy + dz * dz);
      }
      if (!(best < radius_sq)) ++count;
    }
    return count;
  };
  const Mat4 forward = t.matrix();
  const Mat4 backward = invert(t).matrix();
  const std::size_t total = p.size() + q.size();
  if (total == 0) return 0.0;
  return static_cast<double>(outliers(p, q, forward) + outliers(q, p, backward)) /
         static_cast<double>(total);
}

}  // namespace mtpcr
