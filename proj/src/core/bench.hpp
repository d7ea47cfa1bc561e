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

#include <array>
#include <cstdint>
#include <filesystem>

#include "core/multitask.hpp"
#include "core/pointcloud.hpp"

namespace mtpcr {

/// A three-view problem with exact ground truth. `problem.clouds` hold the
/// views in their own (unregistered) frames.
struct SyntheticProblem {
  RegistrationProblem problem;
  std::array<double, 3> overlaps{};  // nominal, pairs (1,2), (2,3), (3,1)
  std::array<double, 3> achieved{};  // measured before noise
  double sigma = 0.0;
  std::uint64_t seed = 0;

  const std::array<RigidTransform, 3>& ground_truth() const {
    return *problem.ground_truth;
  }
};

struct GenerateOptions {
  /// Draw view rotations from [-pi, pi] instead of [-pi/2, pi/2].
  bool full_range = false;
  /// Accepted deviation of each measured overlap from its nominal value.
  double overlap_tolerance = 0.05;
};

/// Closed, asymmetric blob surface sampled with `n` points (deterministic
/// under `seed`); the default base shape for synthetic problems.
PointCloud make_base_cloud(std::size_t n, std::uint64_t seed);

/// Fraction of `source` points whose image under `t` has a `target` point
/// strictly within `epsilon`.
double measure_overlap(const PointCloud& source, const PointCloud& target,
                       const RigidTransform& t, double epsilon);

/// Cuts three partial views from `base` by half-space slicing, tuning the
/// cut positions by bisection until the measured overlaps of pairs (1,2),
/// (2,3), (3,1) match `overlaps`. Views 2 and 3 get random poses, and all
/// views are stored in their own frames so that T12, T23, T31 close the loop.
/// Throws Generation (with the achieved ratios in the message) when an
/// overlap cannot be met within tolerance.
SyntheticProblem generate(const PointCloud& base, const std::array<double, 3>& overlaps,
                          double sigma, std::uint64_t seed,
                          const GenerateOptions& options = {});

/// Normalize by the cloud's largest absolute coordinate to [-1, 1], add
/// N(0, sigma^2) to every coordinate, scale back.
PointCloud add_noise(const PointCloud& cloud, double sigma, std::uint64_t seed);

struct Metrics {
  double rotation_error = 0.0;
  double translation_error = 0.0;
  double loop_residual = 0.0;

  double rotation_error_x1000() const { return rotation_error * 1000.0; }
  double translation_error_x1000() const { return translation_error * 1000.0; }
};

Metrics evaluate(const std::array<RigidTransform, 3>& estimate,
                 const std::array<RigidTransform, 3>& ground_truth);
Metrics evaluate(const RunReport& report, const SyntheticProblem& problem);

/// Exhaustive nearest neighbour; same tie rule as the index (lowest index).
NNResult brute_force_nn(const PointCloud& cloud, const Vec3& query);

/// Exhaustive O(N_p * N_q) consensus loss.
double brute_force_consensus(const PointCloud& p, const PointCloud& q,
                             const RigidTransform& t, double epsilon);

/// Problem directory: view1.ply, view2.ply, view3.ply and manifest.txt.
void save_problem(const SyntheticProblem& problem, const std::filesystem::path& dir);
SyntheticProblem load_problem(const std::filesystem::path& dir);

/// Reads T12, T23, T31 from a manifest file.
std::array<RigidTransform, 3> read_ground_truth(const std::filesystem::path& manifest);

}  // namespace mtpcr
