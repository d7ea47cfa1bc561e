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

#include "core/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mtpcr {

Pose6 Bounds::clamp(Pose6 p) const {
  for (std::size_t d = 0; d < Pose6::kDims; ++d) p[d] = std::clamp(p[d], lo[d], hi[d]);
  return p;
}

bool Bounds::contains(const Pose6& p) const {
  for (std::size_t d = 0; d < Pose6::kDims; ++d)
    if (!(p[d] >= lo[d] && p[d] <= hi[d])) return false;
  return true;
}

Pose6 Bounds::sample(Rng& rng) const {
  Pose6 p;
  for (std::size_t d = 0; d < Pose6::kDims; ++d) p[d] = rng.uniform(lo[d], hi[d]);
  return p;
}

std::size_t top_count(double ratio, std::size_t n) {
  return static_cast<std::size_t>(
      std::ceil(ratio * static_cast<double>(n) * (1.0 - 1e-12)));
}

Population::Population(std::vector<Pose6> individuals, std::vector<double> costs,
                       double top_ratio)
    : individuals_(std::move(individuals)),
      costs_(std::move(costs)),
      top_ratio_(top_ratio),
      best_{Pose6{}, std::numeric_limits<double>::infinity()} {
  if (individuals_.empty() || individuals_.size() != costs_.size())
    throw Error(ErrorCode::Config, "population and cost sizes must match and be non-zero");
  if (!(top_ratio > 0.0 && top_ratio <= 1.0))
    throw Error(ErrorCode::Config, "top ratio must lie in (0, 1]");
  refresh_best();
  update_archive();
}

void Population::refresh_best() {
  for (std::size_t i = 0; i < costs_.size(); ++i)
    if (costs_[i] < best_.cost) best_ = {individuals_[i], costs_[i]};
}

void Population::update_archive() {
  std::vector<std::size_t> order(individuals_.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t k = std::min(top_count(top_ratio_, order.size()), order.size());
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return costs_[a] < costs_[b] || (costs_[a] == costs_[b] && a < b);
                    });
  archive_.clear();
  for (std::size_t i = 0; i < k; ++i)
    archive_.push_back({individuals_[order[i]], costs_[order[i]]});
}

void Population::select(std::span<const Pose6> trials,
                        std::span<const double> trial_costs) {
  if (trials.size() != individuals_.size() || trial_costs.size() != individuals_.size())
    throw Error(ErrorCode::InvalidArgument, "trial set must match the population size");
  for (std::size_t i = 0; i < individuals_.size(); ++i) {
    if (trial_costs[i] <= costs_[i]) {
      individuals_[i] = trials[i];
      costs_[i] = trial_costs[i];
    }
  }
  refresh_best();
  update_archive();
}

std::vector<Pose6> de_mutate(const Population& pop, double scale_factor,
                             const Bounds& bounds, Rng& rng,
                             std::vector<DonorDraw>* draws) {
  const std::size_t n = pop.size();
  if (n < 4) throw Error(ErrorCode::Config, "DE/rand/1 needs a population of at least 4");
  const auto x = pop.individuals();
  std::vector<Pose6> mutants;
  mutants.reserve(n);
  if (draws) draws->clear();
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r1, r2, r3;
    do r1 = rng.index(n); while (r1 == i);
    do r2 = rng.index(n); while (r2 == i || r2 == r1);
    do r3 = rng.index(n); while (r3 == i || r3 == r1 || r3 == r2);
    Pose6 m;
    for (std::size_t d = 0; d < Pose6::kDims; ++d)
      m[d] = x[r1][d] + scale_factor * (x[r2][d] - x[r3][d]);
    mutants.push_back(bounds.clamp(m));
    if (draws) draws->push_back({r1, r2, r3});
  }
  return mutants;
}

double sbx_beta(double u, double eta) {
  const double exponent = 1.0 / (eta + 1.0);
  if (u <= 0.5) return std::pow(2.0 * u, exponent);
  return std::pow(1.0 / (2.0 * (1.0 - u)), exponent);
}

Pose6 sbx_child(const Pose6& mutant, const Pose6& parent, double eta,
                std::span<const double, Pose6::kDims> u, bool first_child) {
  Pose6 child;
  for (std::size_t d = 0; d < Pose6::kDims; ++d) {
    const double beta = sbx_beta(u[d], eta);
    child[d] = first_child ? 0.5 * ((1.0 + beta) * parent[d] + (1.0 - beta) * mutant[d])
                           : 0.5 * ((1.0 - beta) * parent[d] + (1.0 + beta) * mutant[d]);
  }
  return child;
}

Pose6 sbx_cross(const Pose6& mutant, const Pose6& parent, double eta,
                const Bounds& bounds, Rng& rng) {
  const bool first = rng.uniform() < 0.5;
  std::array<double, Pose6::kDims> u;
  for (double& v : u) v = rng.uniform();
  return bounds.clamp(sbx_child(mutant, parent, eta, u, first));
}

double sbx_eta(std::size_t generation, std::size_t total) {
  if (total <= 1) return 2.0;
  return 2.0 + 8.0 * static_cast<double>(generation) / static_cast<double>(total - 1);
}

Population elitist_select(Population pop, std::span<const Pose6> trials,
                          std::span<const double> trial_costs) {
  pop.select(trials, trial_costs);
  return pop;
}

Population update_archive(Population pop) {
  pop.update_archive();
  return pop;
}

}  // namespace mtpcr
