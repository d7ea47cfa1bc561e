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

#include "core/multitask.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <numbers>
#include <thread>

#include "core/fitness.hpp"

namespace mtpcr {

std::string TaskId::label() const {
  return "J" + std::to_string(pair) + (kind == TaskKind::Aiding ? "-a" : "-o");
}

void MTConfig::validate() const {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::Config, why); };
  if (pop_size < 4) fail("population size must be at least 4");
  if (generations < 1) fail("generations must be at least 1");
  if (!(p_intra >= 0.0 && p_intra <= 1.0)) fail("p_intra must lie in [0, 1]");
  if (!(p_inter >= 0.0 && p_inter <= 1.0)) fail("p_inter must lie in [0, 1]");
  if (!(top_ratio > 0.0 && top_ratio <= 1.0)) fail("top ratio must lie in (0, 1]");
  if (top_count(top_ratio, pop_size) < 1) fail("top ratio * population size must be >= 1");
  if (!(scale_factor > 0.0) || !std::isfinite(scale_factor)) fail("scale factor must be positive");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) fail("alpha must be non-negative");
  if (epsilon_override && !(*epsilon_override > 0.0 && std::isfinite(*epsilon_override)))
    fail("epsilon override must be positive");
  if (!(sample_ratio > 0.0 && sample_ratio <= 1.0)) fail("sample ratio must lie in (0, 1]");
}

Bounds SearchSpace::bounds() const {
  constexpr double pi = std::numbers::pi;
  return {Pose6(-pi, -pi, -pi, -shift, -shift, -shift),
          Pose6(pi, pi, pi, shift, shift, shift)};
}

SearchSpace build_search_space(const PointCloud& c1, const PointCloud& c2,
                               const PointCloud& c3) {
  const double shift =
      std::max({c1.extent().maxCoeff(), c2.extent().maxCoeff(), c3.extent().maxCoeff()});
  if (!(shift > 0.0))
    throw Error(ErrorCode::Config, "clouds have zero extent; search space is empty");
  return {shift};
}

unsigned resolve_threads(unsigned requested) {
  unsigned n = requested;
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MTPCR_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return std::max(1u, n);
}

void intra_share(std::vector<Pose6>& mutants_original, std::vector<Pose6>& mutants_aiding,
                 std::span<const Scored> archive_original,
                 std::span<const Scored> archive_aiding, std::size_t count, Rng& rng) {
  if (archive_original.size() < count || archive_aiding.size() < count)
    throw Error(ErrorCode::Config, "archive is smaller than the sharing count");
  if (mutants_original.size() < count || mutants_aiding.size() < count)
    throw Error(ErrorCode::Config, "fewer mutants than the sharing count");

  const auto into_original = rng.choose(mutants_original.size(), count);
  for (std::size_t m = 0; m < count; ++m)
    mutants_original[into_original[m]] = archive_aiding[m].genome;

  const auto into_aiding = rng.choose(mutants_aiding.size(), count);
  for (std::size_t m = 0; m < count; ++m)
    mutants_aiding[into_aiding[m]] = archive_original[m].genome;
}

Pose6 implied_pose(int pair, const std::array<Pose6, 3>& best_original) {
  const auto next = static_cast<std::size_t>(pair % 3);
  const auto after = static_cast<std::size_t>((pair + 1) % 3);
  return transform_to_pose(combine_for_task(pair, pose_to_transform(best_original[next]),
                                            pose_to_transform(best_original[after])));
}

bool inter_share(int pair, std::vector<Pose6>& mutants_original,
                 std::vector<Pose6>& mutants_aiding,
                 const std::array<Pose6, 3>& best_original, std::size_t count,
                 const Bounds& bounds, Rng& rng) {
  if (mutants_original.size() < count || mutants_aiding.size() < count)
    throw Error(ErrorCode::Config, "fewer mutants than the sharing count");
  Pose6 injected;
  try {
    injected = bounds.clamp(implied_pose(pair, best_original));
  } catch (const DegeneratePoseError&) {
    return false;
  }
  for (std::size_t i : rng.choose(mutants_aiding.size(), count)) mutants_aiding[i] = injected;
  for (std::size_t i : rng.choose(mutants_original.size(), count)) mutants_original[i] = injected;
  return true;
}

MultitaskSolver::MultitaskSolver(std::array<PointCloud, 3> clouds, double epsilon,
                                 SearchSpace space, MTConfig config)
    : clouds_(std::move(clouds)),
      epsilon_(epsilon),
      space_(space),
      bounds_(space.bounds()),
      config_(std::move(config)),
      rng_(config_.seed),
      threads_(resolve_threads(config_.threads)) {
  config_.validate();
  if (!(epsilon_ > 0.0)) throw Error(ErrorCode::Config, "inlier threshold must be positive");
}

double MultitaskSolver::evaluate_aiding(int pair, const Pose6& p) const {
  return aiding_fitness(clouds_[pair - 1], clouds_[pair % 3], pose_to_transform(p), epsilon_);
}

double MultitaskSolver::evaluate_original(int pair, const Pose6& p,
                                          const std::array<Pose6, 3>& peers) const {
  const FitnessContext ctx{clouds_[pair - 1],
                           clouds_[pair % 3],
                           epsilon_,
                           config_.alpha,
                           pair,
                           pose_to_transform(peers[pair % 3]),
                           pose_to_transform(peers[(pair + 1) % 3])};
  return original_fitness(ctx, p);
}

std::vector<double> MultitaskSolver::evaluate_batch(
    std::span<const Pose6> genomes, const std::function<double(const Pose6&)>& fn) {
  std::vector<double> costs(genomes.size());
  evaluations_ += genomes.size();
  const std::size_t workers = std::min<std::size_t>(threads_, genomes.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < genomes.size(); ++i) costs[i] = fn(genomes[i]);
    return costs;
  }
  // Each worker writes disjoint indices, so results do not depend on timing.
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < genomes.size(); i += workers) costs[i] = fn(genomes[i]);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return costs;
}

std::array<Pose6, 3> MultitaskSolver::best_original() const {
  return {state(1, TaskKind::Original).population.best().genome,
          state(2, TaskKind::Original).population.best().genome,
          state(3, TaskKind::Original).population.best().genome};
}

void MultitaskSolver::initialize() {
  const std::size_t n = config_.pop_size;
  std::array<std::vector<Pose6>, kTaskCount> genomes;
  for (int pair = 1; pair <= 3; ++pair) {
    for (TaskKind kind : {TaskKind::Aiding, TaskKind::Original}) {
      auto& g = genomes[task_slot(pair, kind)];
      g.reserve(n);
      for (std::size_t i = 0; i < n; ++i) g.push_back(bounds_.sample(rng_));
    }
  }

  std::array<std::optional<Population>, kTaskCount> pops;
  std::array<Pose6, 3> peers;
  for (int pair = 1; pair <= 3; ++pair) {
    const std::size_t slot = task_slot(pair, TaskKind::Aiding);
    auto costs = evaluate_batch(genomes[slot],
                                [&](const Pose6& p) { return evaluate_aiding(pair, p); });
    pops[slot].emplace(std::move(genomes[slot]), std::move(costs), config_.top_ratio);
    // Until an original task has been evaluated, its aiding best stands in
    // as the peer estimate for the loop term.
    peers[pair - 1] = pops[slot]->best().genome;
  }
  for (int pair = 1; pair <= 3; ++pair) {
    const std::size_t slot = task_slot(pair, TaskKind::Original);
    const auto snapshot = peers;
    auto costs = evaluate_batch(genomes[slot], [&](const Pose6& p) {
      return evaluate_original(pair, p, snapshot);
    });
    pops[slot].emplace(std::move(genomes[slot]), std::move(costs), config_.top_ratio);
    peers[pair - 1] = pops[slot]->best().genome;
  }

  states_.clear();
  for (int pair = 1; pair <= 3; ++pair)
    for (TaskKind kind : {TaskKind::Aiding, TaskKind::Original})
      states_.push_back({TaskId{pair, kind}, std::move(*pops[task_slot(pair, kind)])});
  generation_ = 0;
}

void MultitaskSolver::step_pair(int pair) {
  Population& aiding = states_[task_slot(pair, TaskKind::Aiding)].population;
  Population& original = states_[task_slot(pair, TaskKind::Original)].population;
  const double eta = sbx_eta(generation_, config_.generations);

  auto mutants_a = de_mutate(aiding, config_.scale_factor, bounds_, rng_);
  auto mutants_o = de_mutate(original, config_.scale_factor, bounds_, rng_);

  const bool share_intra = rng_.uniform() < config_.p_intra;
  const bool share_inter = rng_.uniform() < config_.p_inter;
  const std::size_t count = top_count(config_.top_ratio, config_.pop_size);
  if (share_intra)
    intra_share(mutants_o, mutants_a, original.archive(), aiding.archive(), count, rng_);
  if (share_inter &&
      !inter_share(pair, mutants_o, mutants_a, best_original(), count, bounds_, rng_))
    ++inter_skips_;

  std::vector<Pose6> trials_a, trials_o;
  trials_a.reserve(mutants_a.size());
  trials_o.reserve(mutants_o.size());
  for (std::size_t i = 0; i < mutants_a.size(); ++i)
    trials_a.push_back(sbx_cross(mutants_a[i], aiding.individuals()[i], eta, bounds_, rng_));
  for (std::size_t i = 0; i < mutants_o.size(); ++i)
    trials_o.push_back(sbx_cross(mutants_o[i], original.individuals()[i], eta, bounds_, rng_));

  const auto costs_a =
      evaluate_batch(trials_a, [&](const Pose6& p) { return evaluate_aiding(pair, p); });
  const auto peers = best_original();
  const auto costs_o = evaluate_batch(
      trials_o, [&](const Pose6& p) { return evaluate_original(pair, p, peers); });

  aiding.select(trials_a, costs_a);
  original.select(trials_o, costs_o);
}

void MultitaskSolver::step_generation() {
  if (states_.empty()) throw Error(ErrorCode::Config, "solver stepped before initialize()");
  for (int pair = 1; pair <= 3; ++pair) step_pair(pair);
  ++generation_;
}

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

RunReport run(const RegistrationProblem& problem, const MTConfig& config,
              const std::function<void(const MultitaskSolver&)>& on_generation) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  std::array<Vec3, 3> offsets;
  std::vector<PointCloud> prepared;
  for (std::size_t k = 0; k < 3; ++k) {
    PointCloud cloud = config.sample_ratio < 1.0
                           ? subsample(problem.clouds[k], config.sample_ratio,
                                       derive_seed(config.seed, k))
                           : problem.clouds[k];
    Decentralized d = decentralize(cloud);
    offsets[k] = d.offset;
    prepared.push_back(std::move(d.cloud));
  }
  std::array<PointCloud, 3> clouds{prepared[0], prepared[1], prepared[2]};
  const double epsilon = config.epsilon_override
                             ? *config.epsilon_override
                             : adaptive_threshold(clouds[0], clouds[1], clouds[2]);
  const SearchSpace space = build_search_space(clouds[0], clouds[1], clouds[2]);

  MultitaskSolver solver(std::move(clouds), epsilon, space, config);
  solver.initialize();

  RunReport report;
  report.seed = config.seed;
  report.generations = config.generations;
  report.epsilon = epsilon;
  report.shift = space.shift;
  report.alpha = config.alpha;
  for (std::size_t g = 0; g < config.generations; ++g) {
    solver.step_generation();
    std::array<double, kTaskCount> row{};
    for (std::size_t s = 0; s < kTaskCount; ++s)
      row[s] = solver.states()[s].population.best().cost;
    report.trace.push_back(row);
    if (on_generation) on_generation(solver);
  }
  report.final_costs = report.trace.back();

  report.decentralized_poses = solver.best_original();
  for (std::size_t k = 0; k < 3; ++k) {
    const std::size_t target = (k + 1) % 3;
    const RigidTransform dec = pose_to_transform(report.decentralized_poses[k]);
    report.transforms[k] = compose(RigidTransform::translation(offsets[target]),
                                   compose(dec, RigidTransform::translation(-offsets[k])));
  }
  report.loop_residual =
      loop_residual(report.transforms[0], report.transforms[1], report.transforms[2]);
  if (problem.ground_truth) {
    report.rotation_error = rotation_error(report.transforms, *problem.ground_truth);
    report.translation_error = translation_error(report.transforms, *problem.ground_truth);
  }
  report.inter_share_skips = solver.inter_share_skips();
  report.evaluations = solver.evaluations();
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace mtpcr
