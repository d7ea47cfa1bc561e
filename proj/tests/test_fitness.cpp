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

#include <doctest.h>

#include "core/bench.hpp"
#include "core/fitness.hpp"
#include "support.hpp"

using namespace test;

namespace {

// Analytic clouds shared with the frozen scipy values below.
PointCloud analytic_p() {
  std::vector<Vec3> p;
  for (int i = 0; i < 40; ++i)
    p.emplace_back(std::sin(1.3 * i), 0.8 * std::cos(0.7 * i), 0.6 * std::sin(0.31 * i + 1.0));
  return PointCloud(p);
}

PointCloud analytic_q() {
  std::vector<Vec3> q;
  for (int j = 0; j < 30; ++j)
    q.emplace_back(std::sin(1.3 * j + 0.05), 0.8 * std::cos(0.7 * j - 0.03),
                   0.6 * std::sin(0.31 * j + 1.02));
  return PointCloud(q);
}

}  // namespace

TEST_CASE("consensus loss: trivial cases") {
  Rng rng(31);
  const PointCloud p = random_cloud(rng, 200);
  CHECK(consensus_loss(p, p, RigidTransform(), 1e-6) == 0.0);
  CHECK(consensus_loss(p, p, RigidTransform::translation(Vec3(100, 0, 0)), 0.5) == 1.0);
  CHECK_THROWS_AS(consensus_loss(p, p, RigidTransform(), 0.0), Error);
  CHECK_THROWS_AS(consensus_loss(p, p, RigidTransform(), -1.0), Error);
}

TEST_CASE("consensus loss: frozen scipy value") {
  // scipy: 32 + 23 outliers out of 70.
  const Pose6 pose(0.1, -0.2, 0.3, 0.05, -0.02, 0.01);
  const double v = consensus_loss(analytic_p(), analytic_q(), pose_to_transform(pose), 0.2);
  CHECK(v == doctest::Approx(0.7857142857142857).epsilon(1e-12));
  CHECK(std::abs(v - oracle::consensus(plain(analytic_p()), plain(analytic_q()), plain(pose), 0.2)) <
        1e-12);
}

TEST_CASE("consensus loss: boundary distance counts as outlier") {
  const PointCloud p({Vec3(0, 0, 0)});
  const PointCloud q({Vec3(0.5, 0, 0)});
  CHECK(consensus_loss(p, q, RigidTransform(), 0.5) == 1.0);
  CHECK(consensus_loss(p, q, RigidTransform(), std::nextafter(0.5, 1.0)) == 0.0);
}

TEST_CASE("consensus loss: 6 x 5 points against the pair-count oracle") {
  Rng rng(32);
  for (int k = 0; k < 50; ++k) {
    const PointCloud p = random_cloud(rng, 6), q = random_cloud(rng, 5);
    const Pose6 pose = random_pose(rng, kPi, 0.3);
    const double eps = rng.uniform(0.2, 1.2);
    const double lib = consensus_loss(p, q, pose_to_transform(pose), eps);
    REQUIRE(std::abs(lib - oracle::consensus(plain(p), plain(q), plain(pose), eps)) < 1e-12);
  }
}

TEST_CASE("consensus loss: symmetry") {
  Rng rng(33);
  for (int k = 0; k < 20; ++k) {
    const PointCloud p = random_cloud(rng, 150), q = random_cloud(rng, 120);
    const RigidTransform t = pose_to_transform(random_pose(rng, kPi, 0.2));
    const double eps = rng.uniform(0.05, 0.2);
    REQUIRE(std::abs(consensus_loss(p, q, t, eps) - consensus_loss(q, p, invert(t), eps)) <
            1e-12);
  }
}

TEST_CASE("aiding fitness") {
  Rng rng(34);
  const PointCloud p = random_cloud(rng, 300);
  CHECK(aiding_fitness(p, p, RigidTransform(), 0.1) == 0.0);
  CHECK(aiding_fitness(p, p, pose_to_transform(Pose6(0.01, 0, 0, 0, 0, 0)), 0.1) > 0.0);

  const Pose6 pose(0.1, -0.2, 0.3, 0.05, -0.02, 0.01);
  CHECK(aiding_fitness(analytic_p(), analytic_q(), pose_to_transform(pose), 0.2) ==
        doctest::Approx(1.366393576546909).epsilon(1e-12));

  for (int k = 0; k < 100; ++k) {
    const PointCloud a = random_cloud(rng, 20 + 15 * k), b = random_cloud(rng, 30 + 10 * k);
    const Pose6 pz = random_pose(rng, kPi, 1.5);
    const double eps = rng.uniform(0.01, 0.3);
    const double lib = aiding_fitness(a, b, pose_to_transform(pz), eps);
    const double ref = oracle::aiding(plain(a), plain(b), plain(pz), eps);
    REQUIRE(std::abs(lib - ref) <= 1e-12 * std::max(1.0, ref));
  }
}

TEST_CASE("aiding fitness is invariant to a joint rigid motion") {
  Rng rng(35);
  const PointCloud p = random_cloud(rng, 400), q = random_cloud(rng, 350);
  const RigidTransform t = random_transform(rng, 0.3);
  const RigidTransform g = random_transform(rng, 5.0);
  const double before = aiding_fitness(p, q, t, 0.1);
  const double after = aiding_fitness(apply_transform(p, g), apply_transform(q, g),
                                      compose(g, compose(t, invert(g))), 0.1);
  CHECK(after == doctest::Approx(before).epsilon(1e-9));
}

TEST_CASE("original fitness") {
  Rng rng(36);
  const PointCloud p = random_cloud(rng, 200), q = random_cloud(rng, 180);
  const RigidTransform next = random_transform(rng), after = random_transform(rng);
  for (int task = 1; task <= 3; ++task) {
    for (int k = 0; k < 20; ++k) {
      const Pose6 cand = random_pose(rng, kPi, 1.0);
      const FitnessContext ctx{p, q, 0.1, 0.05, task, next, after};
      const double local = consensus_loss(p, q, pose_to_transform(cand), 0.1);
      // Candidate in its own slot of T31 * T23 * T12, peers in cyclic order.
      const oracle::M4 c = plain(cand), n = plain(next), a = plain(after);
      const double loop = task == 1   ? oracle::loop_residual(c, n, a)
                          : task == 2 ? oracle::loop_residual(a, c, n)
                                      : oracle::loop_residual(n, a, c);
      const double v = original_fitness(ctx, cand);
      REQUIRE(std::abs(v - (local + 0.05 * std::tanh(loop))) < 1e-12);
      REQUIRE(v >= local);
      REQUIRE(v - local <= 0.05);
      const FitnessContext zero{p, q, 0.1, 0.0, task, next, after};
      REQUIRE(original_fitness(zero, cand) == local);
    }
  }
  CHECK_THROWS_AS(loop_residual_for_slot(4, next, next, next), Error);
}

TEST_CASE("ground truth of a synthetic problem has zero loop term") {
  const SyntheticProblem prob = generate(make_base_cloud(800, 3), {0.8, 0.6, 0.6}, 0.0, 5);
  const auto& gt = prob.ground_truth();
  const auto& c = prob.problem.clouds;
  const double eps = adaptive_threshold(c[0], c[1], c[2]);
  for (int task = 1; task <= 3; ++task) {
    const std::size_t k = task - 1;
    const FitnessContext ctx{c[k], c[(k + 1) % 3], eps, 0.05, task, gt[(k + 1) % 3],
                             gt[(k + 2) % 3]};
    const Pose6 pose = transform_to_pose(gt[k]);
    const double expect = consensus_loss(c[k], c[(k + 1) % 3], pose_to_transform(pose), eps);
    CHECK(original_fitness(ctx, pose) == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("noiseless full overlap: ground truth is a global minimum") {
  const PointCloud base = make_base_cloud(600, 4);
  const RigidTransform g = pose_to_transform(Pose6(0.3, -0.4, 1.0, 0.2, 0.1, -0.3));
  const PointCloud moved = apply_transform(base, invert(g));
  const double eps = adaptive_threshold(base, base, base);
  CHECK(consensus_loss(moved, base, g, eps) == 0.0);
  CHECK(aiding_fitness(moved, base, g, eps) < 1e-20);
}
