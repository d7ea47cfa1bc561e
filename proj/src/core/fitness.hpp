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

#include "core/geometry.hpp"
#include "core/pointcloud.hpp"

namespace mtpcr {

/// Fraction of points, over both mapping directions, whose nearest
/// counterpart is not strictly closer than `epsilon`:
///   P mapped by T against Q, plus Q mapped by T^-1 against P,
/// divided by N_p + N_q. Zero means every point is an inlier.
double consensus_loss(const PointCloud& p, const PointCloud& q,
                      const RigidTransform& t, double epsilon);

/// Coarse pairwise loss for the aiding tasks: the mean of the smallest
/// ceil(N_p / 2) squared closest-point distances from T*P to Q, divided by
/// epsilon^2.
double aiding_fitness(const PointCloud& p, const PointCloud& q,
                      const RigidTransform& t, double epsilon);

/// Everything an original task needs to score one candidate. The candidate
/// occupies slot `task` of the loop T31*T23*T12; `peer_next` is the current
/// best transform of task (task mod 3) + 1 and `peer_after` that of the task
/// after it.
struct FitnessContext {
  const PointCloud& source;
  const PointCloud& target;
  double epsilon;
  double alpha;
  int task;
  RigidTransform peer_next;
  RigidTransform peer_after;
};

/// Loop residual with `candidate` placed in slot `task` (1..3).
double loop_residual_for_slot(int task, const RigidTransform& candidate,
                              const RigidTransform& peer_next,
                              const RigidTransform& peer_after);

/// consensus_loss + alpha * tanh(loop residual).
double original_fitness(const FitnessContext& ctx, const Pose6& candidate);

}  // namespace mtpcr
