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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/evolution.hpp"
#include "core/geometry.hpp"
#include "core/pointcloud.hpp"
#include "core/rng.hpp"

namespace mtpcr {

enum class TaskKind { Aiding, Original };

/// Task J_pair registers cloud `pair` onto cloud (pair mod 3) + 1.
struct TaskId {
  int pair;  // 1..3
  TaskKind kind;

  std::string label() const;  // "J1-a", "J1-o", ...
};

/// Six tasks in report order: J1-a, J1-o, J2-a, J2-o, J3-a, J3-o.
inline constexpr std::size_t kTaskCount = 6;
constexpr std::size_t task_slot(int pair, TaskKind kind) {
  return static_cast<std::size_t>(2 * (pair - 1) + (kind == TaskKind::Original ? 1 : 0));
}

struct MTConfig {
  std::size_t pop_size = 100;
  std::size_t generations = 60;
  double p_intra = 0.5;
  double p_inter = 0.5;
  double top_ratio = 0.1;
  double scale_factor = 0.5;
  double alpha = 0.05;
  std::optional<double> epsilon_override;
  double sample_ratio = 1.0;
  std::uint64_t seed = 1;
  // Evaluation threads; 0 = hardware concurrency capped by MTPCR_THREADS.
  unsigned threads = 0;

  /// Throws Config on inconsistent values.
  void validate() const;
};

/// Angles in [-pi, pi], translations in [-shift, shift].
struct SearchSpace {
  double shift = 0.0;
  Bounds bounds() const;
};

/// shift = largest bounding-box edge over the three (decentralized) clouds.
SearchSpace build_search_space(const PointCloud& c1, const PointCloud& c2,
                               const PointCloud& c3);

/// Three raw clouds and, optionally, their ground-truth T12, T23, T31.
struct RegistrationProblem {
  std::array<PointCloud, 3> clouds;
  std::optional<std::array<RigidTransform, 3>> ground_truth;
};

struct TaskState {
  TaskId id;
  Population population;
};

struct RunReport {
  std::uint64_t seed = 0;
  std::size_t generations = 0;
  double epsilon = 0.0;
  double shift = 0.0;
  double alpha = 0.0;
  /// Best cost after each generation, one row per generation, columns in
  /// task_slot order.
  std::vector<std::array<double, kTaskCount>> trace;
  std::array<double, kTaskCount> final_costs{};
  /// Best original-task transforms T12, T23, T31 in the input clouds' frames.
  std::array<RigidTransform, 3> transforms;
  /// The same transforms between the decentralized clouds.
  std::array<Pose6, 3> decentralized_poses;
  double loop_residual = 0.0;
  std::optional<double> rotation_error;
  std::optional<double> translation_error;
  std::size_t inter_share_skips = 0;
  std::size_t evaluations = 0;
  /// Not part of the serialized report (would break byte-identical output).
  double wall_seconds = 0.0;
};

/// Replaces k randomly chosen mutants of the original task with the aiding
/// task's archive, then k randomly chosen mutants of the aiding task with the
/// original task's archive (k = archive size). Config error if an archive is
/// smaller than `count`.
void intra_share(std::vector<Pose6>& mutants_original, std::vector<Pose6>& mutants_aiding,
                 std::span<const Scored> archive_original,
                 std::span<const Scored> archive_aiding, std::size_t count, Rng& rng);

/// Injects the pose implied by the other two original tasks' bests into
/// `count` randomly chosen mutants of the aiding task and then of the
/// original task. Returns false (and consumes no randomness) when the
/// implied transform is at gimbal lock.
bool inter_share(int pair, std::vector<Pose6>& mutants_original,
                 std::vector<Pose6>& mutants_aiding,
                 const std::array<Pose6, 3>& best_original, std::size_t count,
                 const Bounds& bounds, Rng& rng);

/// Pose that inter_share would inject for `pair`.
Pose6 implied_pose(int pair, const std::array<Pose6, 3>& best_original);

/// Runs the six co-evolving tasks over a prepared (decentralized) problem.
/// Exposed so tests can step generations individually.
class MultitaskSolver {
 public:
  /// `clouds` must already be decentralized; `epsilon` > 0.
  MultitaskSolver(std::array<PointCloud, 3> clouds, double epsilon, SearchSpace space,
                  MTConfig config);

  void initialize();
  void step_generation();

  std::size_t generation() const { return generation_; }
  std::span<const TaskState> states() const { return states_; }
  const TaskState& state(int pair, TaskKind kind) const {
    return states_[task_slot(pair, kind)];
  }
  std::array<Pose6, 3> best_original() const;
  std::size_t inter_share_skips() const { return inter_skips_; }
  std::size_t evaluations() const { return evaluations_; }
  double epsilon() const { return epsilon_; }
  const SearchSpace& space() const { return space_; }
  const std::array<PointCloud, 3>& clouds() const { return clouds_; }

  double evaluate_aiding(int pair, const Pose6& p) const;
  double evaluate_original(int pair, const Pose6& p,
                           const std::array<Pose6, 3>& peers) const;

 private:
  std::vector<double> evaluate_batch(std::span<const Pose6> genomes,
                                     const std::function<double(const Pose6&)>& fn);
  void step_pair(int pair);

  std::array<PointCloud, 3> clouds_;
  double epsilon_;
  SearchSpace space_;
  Bounds bounds_;
  MTConfig config_;
  Rng rng_;
  unsigned threads_;
  std::vector<TaskState> states_;
  std::size_t generation_ = 0;
  std::size_t inter_skips_ = 0;
  std::size_t evaluations_ = 0;
};

/// Full registration: subsample (if requested), decentralize, choose epsilon
/// and search space, evolve for the configured generations and map the
/// result back to the input frames. `on_generation`, if set, is called after
/// every generation with the solver.
RunReport run(const RegistrationProblem& problem, const MTConfig& config,
              const std::function<void(const MultitaskSolver&)>& on_generation = {});

/// Worker count for a config value of 0: hardware concurrency capped by the
/// MTPCR_THREADS environment variable.
unsigned resolve_threads(unsigned requested);

}  // namespace mtpcr
