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

#include <algorithm>
#include <set>

#include "core/evolution.hpp"
#include "support.hpp"

using namespace test;

namespace {

Bounds box() {
  return {Pose6(-kPi, -kPi, -kPi, -2, -2, -2), Pose6(kPi, kPi, kPi, 2, 2, 2)};
}

Population random_population(Rng& rng, std::size_t n, double ratio = 0.1) {
  const Bounds b = box();
  std::vector<Pose6> x;
  std::vector<double> c;
  for (std::size_t i = 0; i < n; ++i) {
    x.push_back(b.sample(rng));
    c.push_back(rng.uniform());
  }
  return Population(x, c, ratio);
}

}  // namespace

TEST_CASE("top_count") {
  CHECK(top_count(0.1, 100) == 10);
  CHECK(top_count(0.1, 30) == 3);
  CHECK(top_count(0.15, 10) == 2);
  CHECK(top_count(1.0, 7) == 7);
  CHECK(top_count(0.01, 10) == 1);
}

TEST_CASE("bounds") {
  const Bounds b = box();
  Rng rng(41);
  for (int k = 0; k < 1000; ++k) REQUIRE(b.contains(b.sample(rng)));
  const Pose6 c = b.clamp(Pose6(10, -10, 0.5, 3, -3, 1));
  CHECK(c == Pose6(kPi, -kPi, 0.5, 2, -2, 1));
}

TEST_CASE("DE/rand/1 mutation") {
  Rng rng(42);
  const Population pop = random_population(rng, 20);
  std::vector<DonorDraw> draws;
  const auto mutants = de_mutate(pop, 0.5, box(), rng, &draws);
  REQUIRE(mutants.size() == 20);
  REQUIRE(draws.size() == 20);
  const auto x = pop.individuals();
  for (std::size_t i = 0; i < 20; ++i) {
    const auto [r1, r2, r3] = draws[i];
    CHECK(std::set<std::size_t>{i, r1, r2, r3}.size() == 4);
    Pose6 expect;
    for (std::size_t d = 0; d < 6; ++d) expect[d] = x[r1][d] + 0.5 * (x[r2][d] - x[r3][d]);
    CHECK(mutants[i] == box().clamp(expect));
    CHECK(box().contains(mutants[i]));
  }

  Rng small(1);
  CHECK_THROWS_AS(de_mutate(random_population(small, 3, 0.5), 0.5, box(), small), Error);
}

TEST_CASE("DE mutation is reproducible under the same seed") {
  Rng a(43), b(43);
  const Population pa = random_population(a, 30), pb = random_population(b, 30);
  CHECK(de_mutate(pa, 0.5, box(), a) == de_mutate(pb, 0.5, box(), b));
}

TEST_CASE("SBX beta and children follow the closed form") {
  CHECK(sbx_beta(0.5, 2.0) == 1.0);
  CHECK(sbx_beta(0.25, 2.0) == doctest::Approx(std::pow(0.5, 1.0 / 3.0)).epsilon(1e-15));
  CHECK(sbx_beta(0.75, 10.0) == doctest::Approx(std::pow(2.0, 1.0 / 11.0)).epsilon(1e-15));

  const Pose6 mutant(0.1, 0.2, 0.3, 0.4, 0.5, 0.6), parent(-1, 1, -1, 1, -1, 1);
  const std::array<double, 6> u{0.1, 0.3, 0.5, 0.6, 0.8, 0.99};
  const Pose6 c1 = sbx_child(mutant, parent, 4.0, u, true);
  const Pose6 c2 = sbx_child(mutant, parent, 4.0, u, false);
  for (std::size_t d = 0; d < 6; ++d) {
    const double beta = u[d] <= 0.5 ? std::pow(2 * u[d], 0.2) : std::pow(1 / (2 * (1 - u[d])), 0.2);
    CHECK(c1[d] == doctest::Approx(0.5 * ((1 + beta) * parent[d] + (1 - beta) * mutant[d])));
    CHECK(c2[d] == doctest::Approx(0.5 * ((1 - beta) * parent[d] + (1 + beta) * mutant[d])));
    // The two children are symmetric about the parents' midpoint.
    CHECK(c1[d] + c2[d] == doctest::Approx(parent[d] + mutant[d]));
  }
}

TEST_CASE("SBX crossover draws the coin first, then one uniform per dimension") {
  Rng rng(44), replay(44);
  const Bounds b = box();
  for (int k = 0; k < 200; ++k) {
    const Pose6 m = b.sample(rng), p = b.sample(rng);
    for (int s = 0; s < 12; ++s) (void)replay.uniform();  // the two samples above
    const double eta = sbx_eta(k % 60, 60);
    const Pose6 child = sbx_cross(m, p, eta, b, rng);
    const bool first = replay.uniform() < 0.5;
    std::array<double, 6> u;
    for (double& v : u) v = replay.uniform();
    REQUIRE(child == b.clamp(sbx_child(m, p, eta, u, first)));
    REQUIRE(b.contains(child));
  }
}

TEST_CASE("SBX eta schedule") {
  CHECK(sbx_eta(0, 60) == 2.0);
  CHECK(sbx_eta(59, 60) == 10.0);
  CHECK(sbx_eta(30, 61) == doctest::Approx(6.0));
  CHECK(sbx_eta(0, 1) == 2.0);
}

TEST_CASE("SBX spread shrinks as eta grows") {
  Rng rng(45);
  const Bounds b = box();
  const Pose6 m(0, 0, 0, 0, 0, 0), p(1, 1, 1, 1, 1, 1);
  auto spread = [&](double eta) {
    double s = 0.0;
    for (int k = 0; k < 4000; ++k) {
      const Pose6 c = sbx_cross(m, p, eta, b, rng);
      s += std::min(std::abs(c[0] - 0.0), std::abs(c[0] - 1.0));
    }
    return s / 4000;
  };
  CHECK(spread(10.0) < spread(2.0));
}

TEST_CASE("greedy selection, best and archive") {
  std::vector<Pose6> x;
  for (int i = 0; i < 10; ++i) x.push_back(Pose6(i, 0, 0, 0, 0, 0));
  const std::vector<double> c{5, 3, 3, 9, 1, 7, 1, 8, 6, 4};
  Population pop(x, c, 0.3);
  CHECK(pop.best().cost == 1.0);
  CHECK(pop.best().genome == x[4]);  // first of the tied minimum
  REQUIRE(pop.archive().size() == 3);
  CHECK(pop.archive()[0].genome == x[4]);
  CHECK(pop.archive()[1].genome == x[6]);
  CHECK(pop.archive()[2].genome == x[1]);

  std::vector<Pose6> t;
  for (int i = 0; i < 10; ++i) t.push_back(Pose6(100 + i, 0, 0, 0, 0, 0));
  const std::vector<double> tc{5, 4, 2, 10, 1, 0.5, 2, 8, 6, 3};
  pop.select(t, tc);
  const auto ind = pop.individuals();
  CHECK(ind[0] == t[0]);  // equal cost: trial wins
  CHECK(ind[1] == x[1]);
  CHECK(ind[2] == t[2]);
  CHECK(ind[3] == x[3]);
  CHECK(ind[5] == t[5]);
  CHECK(ind[6] == x[6]);
  CHECK(pop.best().cost == 0.5);
  CHECK(pop.archive()[0].cost == 0.5);
  CHECK(pop.archive()[1].cost == 1.0);
  for (std::size_t i = 0; i < 10; ++i) CHECK(pop.costs()[i] == std::min(c[i], tc[i]));

  CHECK_THROWS_AS(pop.select(std::vector<Pose6>(3), std::vector<double>(3)), Error);
  CHECK_THROWS_AS(Population({}, {}, 0.1), Error);
  CHECK_THROWS_AS(Population(x, c, 0.0), Error);
}

TEST_CASE("best cost never increases and genomes stay in bounds") {
  Rng rng(46);
  const Bounds b = box();
  auto cost = [](const Pose6& p) {
    double s = 0.0;
    for (std::size_t d = 0; d < 6; ++d) s += (p[d] - 0.3) * (p[d] - 0.3);
    return s;
  };
  std::vector<Pose6> x;
  std::vector<double> c;
  for (int i = 0; i < 40; ++i) {
    x.push_back(b.sample(rng));
    c.push_back(cost(x.back()));
  }
  Population pop(x, c, 0.1);
  const double first = pop.best().cost;
  double last = first;
  for (std::size_t g = 0; g < 40; ++g) {
    const auto m = de_mutate(pop, 0.5, b, rng);
    std::vector<Pose6> t;
    std::vector<double> tc;
    for (std::size_t i = 0; i < m.size(); ++i) {
      t.push_back(sbx_cross(m[i], pop.individuals()[i], sbx_eta(g, 40), b, rng));
      tc.push_back(cost(t.back()));
    }
    pop = elitist_select(pop, t, tc);
    REQUIRE(pop.best().cost <= last);
    last = pop.best().cost;
    for (const Pose6& p : pop.individuals()) REQUIRE(b.contains(p));
  }
  CHECK(last < 0.1 * first);
  const Population refreshed = update_archive(pop);
  CHECK(refreshed.archive().size() == 4);
}
