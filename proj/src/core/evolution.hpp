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
#include <cstddef>
#include <span>
#include <vector>

#include "core/geometry.hpp"
#include "core/rng.hpp"

namespace mtpcr {

/// Per-dimension box [lo, hi] for genomes.
struct Bounds {
  Pose6 lo;
  Pose6 hi;

  Pose6 clamp(Pose6 p) const;
  bool contains(const Pose6& p) const;
  Pose6 sample(Rng& rng) const;
};

/// ceil(ratio * n) with slack against products such as 0.1 * 30 rounding up.
std::size_t top_count(double ratio, std::size_t n);

struct Scored {
  Pose6 genome;
  double cost;
};

/// One task's population. Costs are aligned with individuals; `best` is the
/// best individual seen so far and `archive` the ceil(top_ratio * n) lowest
/// cost members of the current population, ascending, ties by index.
class Population {
 public:
  Population(std::vector<Pose6> individuals, std::vector<double> costs,
             double top_ratio);

  std::size_t size() const { return individuals_.size(); }
  std::span<const Pose6> individuals() const { return individuals_; }
  std::span<const double> costs() const { return costs_; }
  const Scored& best() const { return best_; }
  std::span<const Scored> archive() const { return archive_; }
  double top_ratio() const { return top_ratio_; }

  /// Per-index greedy replacement: trial i survives iff its cost is <= the
  /// incumbent's. Refreshes best and archive.
  void select(std::span<const Pose6> trials, std::span<const double> trial_costs);

  /// Recomputes the archive from the current population.
  void update_archive();

 private:
  void refresh_best();

  std::vector<Pose6> individuals_;
  std::vector<double> costs_;
  double top_ratio_;
  Scored best_;
  std::vector<Scored> archive_;
};

/// Donor indices drawn for one DE/rand/1 mutant.
struct DonorDraw {
  std::size_t r1, r2, r3;
};

/// DE/rand/1: mutant_i = x_r1 + F (x_r2 - x_r3) with r1, r2, r3, i pairwise
/// distinct, clamped to bounds. Requires n >= 4 (Config error otherwise).
/// When `draws` is non-null it receives the indices used for each mutant.
std::vector<Pose6> de_mutate(const Population& pop, double scale_factor,
                             const Bounds& bounds, Rng& rng,
                             std::vector<DonorDraw>* draws = nullptr);

/// SBX spread factor for a uniform draw u in [0, 1).
double sbx_beta(double u, double eta);

/// Deterministic SBX core: the first or second child for the given uniform
/// draws, before clamping.
Pose6 sbx_child(const Pose6& mutant, const Pose6& parent, double eta,
                std::span<const double, Pose6::kDims> u, bool first_child);

/// Simulated binary crossover between a mutant and its parent. Consumes one
/// coin (child choice) and then one uniform per dimension; result clamped.
Pose6 sbx_cross(const Pose6& mutant, const Pose6& parent, double eta,
                const Bounds& bounds, Rng& rng);

/// Distribution index rising linearly from 2 at the first generation to 10
/// at the last (generation in [0, total - 1]).
double sbx_eta(std::size_t generation, std::size_t total);

/// Functional form of Population::select.
Population elitist_select(Population pop, std::span<const Pose6> trials,
                          std::span<const double> trial_costs);

/// Functional form of Population::update_archive.
Population update_archive(Population pop);

}  // namespace mtpcr
