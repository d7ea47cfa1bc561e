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

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "core/bench.hpp"
#include "core/fitness.hpp"
#include "core/multitask.hpp"
#include "core/report_io.hpp"
#include "support.hpp"

using namespace test;

namespace {

const SyntheticProblem& small_problem() {
  static const SyntheticProblem p = generate(make_base_cloud(600, 2), {0.8, 0.6, 0.6}, 0.0, 9);
  return p;
}

MTConfig quick(std::size_t n = 12, std::size_t g = 3) {
  MTConfig c;
  c.pop_size = n;
  c.generations = g;
  c.threads = 1;
  c.seed = 77;
  return c;
}

std::array<PointCloud, 3> centred(const RegistrationProblem& p) {
  return {decentralize(p.clouds[0]).cloud, decentralize(p.clouds[1]).cloud,
          decentralize(p.clouds[2]).cloud};
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("task ids") {
  CHECK(TaskId{1, TaskKind::Aiding}.label() == "J1-a");
  CHECK(TaskId{3, TaskKind::Original}.label() == "J3-o");
  CHECK(task_slot(1, TaskKind::Aiding) == 0);
  CHECK(task_slot(2, TaskKind::Original) == 3);
  CHECK(task_slot(3, TaskKind::Original) == 5);
}

TEST_CASE("config validation") {
  CHECK_NOTHROW(MTConfig{}.validate());
  auto bad = [](auto mutate) {
    MTConfig c;
    mutate(c);
    CHECK_THROWS_AS(c.validate(), Error);
  };
  bad([](MTConfig& c) { c.pop_size = 3; });
  bad([](MTConfig& c) { c.generations = 0; });
  bad([](MTConfig& c) { c.p_intra = 1.5; });
  bad([](MTConfig& c) { c.p_inter = -0.1; });
  bad([](MTConfig& c) { c.top_ratio = 0.0; });
  bad([](MTConfig& c) { c.alpha = -1.0; });
  bad([](MTConfig& c) { c.epsilon_override = 0.0; });
  bad([](MTConfig& c) { c.sample_ratio = 0.0; });
  bad([](MTConfig& c) { c.scale_factor = 0.0; });
}

TEST_CASE("search space") {
  std::vector<Vec3> cube;
  for (int i = 0; i < 8; ++i) cube.emplace_back(i & 1, (i >> 1) & 1, (i >> 2) & 1);
  const PointCloud unit(cube);
  CHECK(build_search_space(unit, unit, unit).shift == 1.0);

  const PointCloud box({Vec3(0, 0, 0), Vec3(2, 3, 5)});
  CHECK(build_search_space(unit, box, unit).shift == 5.0);

  Rng rng(51);
  const PointCloud a = random_cloud(rng, 100, 1.0), b = random_cloud(rng, 100, 2.0),
                   c = random_cloud(rng, 100, 0.5);
  double expect = 0.0;
  for (const PointCloud* cl : {&a, &b, &c})
    for (int d = 0; d < 3; ++d) {
      double lo = 1e300, hi = -1e300;
      for (const Vec3& p : cl->points()) {
        lo = std::min(lo, p[d]);
        hi = std::max(hi, p[d]);
      }
      expect = std::max(expect, hi - lo);
    }
  const SearchSpace s = build_search_space(a, b, c);
  CHECK(s.shift == expect);
  const Bounds bounds = s.bounds();
  CHECK(bounds.lo == Pose6(-kPi, -kPi, -kPi, -expect, -expect, -expect));
  CHECK(bounds.hi == Pose6(kPi, kPi, kPi, expect, expect, expect));

  const PointCloud dot({Vec3(1, 1, 1)});
  CHECK_THROWS_AS(build_search_space(dot, dot, dot), Error);
}

TEST_CASE("initialization") {
  const auto clouds = centred(small_problem().problem);
  const double eps = adaptive_threshold(clouds[0], clouds[1], clouds[2]);
  const SearchSpace space = build_search_space(clouds[0], clouds[1], clouds[2]);
  MultitaskSolver a(clouds, eps, space, quick(16));
  MultitaskSolver b(clouds, eps, space, quick(16));
  CHECK_THROWS_AS(a.step_generation(), Error);
  a.initialize();
  b.initialize();
  REQUIRE(a.states().size() == kTaskCount);
  for (std::size_t s = 0; s < kTaskCount; ++s) {
    const Population& pop = a.states()[s].population;
    CHECK(pop.size() == 16);
    for (const Pose6& p : pop.individuals()) CHECK(space.bounds().contains(p));
    CHECK(std::vector<double>(pop.costs().begin(), pop.costs().end()) ==
          std::vector<double>(b.states()[s].population.costs().begin(),
                              b.states()[s].population.costs().end()));
    CHECK(a.states()[s].id.label() == TaskId{static_cast<int>(s / 2) + 1,
                                             s % 2 ? TaskKind::Original : TaskKind::Aiding}
                                          .label());
  }
  CHECK(a.evaluations() == 6 * 16);
  // Aiding costs are the pure pairwise loss.
  const Population& j2a = a.state(2, TaskKind::Aiding).population;
  CHECK(j2a.costs()[5] == aiding_fitness(clouds[1], clouds[2],
                                         pose_to_transform(j2a.individuals()[5]), eps));
}

TEST_CASE("every generation evaluates exactly 6n trials and keeps the best monotone") {
  const auto clouds = centred(small_problem().problem);
  const double eps = adaptive_threshold(clouds[0], clouds[1], clouds[2]);
  MultitaskSolver solver(clouds, eps, build_search_space(clouds[0], clouds[1], clouds[2]),
                         quick(12, 6));
  solver.initialize();
  std::array<double, kTaskCount> last{};
  for (std::size_t s = 0; s < kTaskCount; ++s) last[s] = solver.states()[s].population.best().cost;
  for (int g = 1; g <= 6; ++g) {
    solver.step_generation();
    CHECK(solver.generation() == static_cast<std::size_t>(g));
    CHECK(solver.evaluations() == 6 * 12 * static_cast<std::size_t>(g + 1));
    for (std::size_t s = 0; s < kTaskCount; ++s) {
      const double now = solver.states()[s].population.best().cost;
      CHECK(now <= last[s]);
      last[s] = now;
      for (const Pose6& p : solver.states()[s].population.individuals())
        REQUIRE(solver.space().bounds().contains(p));
    }
  }
}

TEST_CASE("intra share copies the peer archives into random mutants") {
  Rng rng(52);
  std::vector<Pose6> mo(10, Pose6(1, 1, 1, 1, 1, 1)), ma(10, Pose6(2, 2, 2, 2, 2, 2));
  std::vector<Scored> arch_o{{Pose6(0.1, 0, 0, 0, 0, 0), 1}, {Pose6(0.2, 0, 0, 0, 0, 0), 2}};
  std::vector<Scored> arch_a{{Pose6(0.3, 0, 0, 0, 0, 0), 1}, {Pose6(0.4, 0, 0, 0, 0, 0), 2}};
  intra_share(mo, ma, arch_o, arch_a, 2, rng);
  auto count = [](const std::vector<Pose6>& v, const Pose6& p) {
    return std::count(v.begin(), v.end(), p);
  };
  CHECK(count(mo, arch_a[0].genome) == 1);
  CHECK(count(mo, arch_a[1].genome) == 1);
  CHECK(count(mo, Pose6(1, 1, 1, 1, 1, 1)) == 8);
  CHECK(count(ma, arch_o[0].genome) == 1);
  CHECK(count(ma, arch_o[1].genome) == 1);
  CHECK(count(ma, Pose6(2, 2, 2, 2, 2, 2)) == 8);
  CHECK_THROWS_AS(intra_share(mo, ma, arch_o, arch_a, 3, rng), Error);
}

TEST_CASE("inter share injects the pose implied by the peers") {
  const auto& gt = small_problem().ground_truth();
  const std::array<Pose6, 3> bests{transform_to_pose(gt[0]), transform_to_pose(gt[1]),
                                   transform_to_pose(gt[2])};
  const Bounds wide{Pose6(-kPi, -kPi, -kPi, -50, -50, -50), Pose6(kPi, kPi, kPi, 50, 50, 50)};
  for (int pair = 1; pair <= 3; ++pair) {
    // Corrupt the task's own best: the injected pose must not depend on it.
    std::array<Pose6, 3> peers = bests;
    peers[pair - 1] = Pose6(0.5, 0.5, 0.5, 1, 1, 1);
    const Pose6 implied = implied_pose(pair, peers);
    for (std::size_t d = 0; d < 6; ++d) CHECK(std::abs(implied[d] - bests[pair - 1][d]) < 1e-6);

    Rng rng(53);
    std::vector<Pose6> mo(10), ma(10);
    REQUIRE(inter_share(pair, mo, ma, peers, 3, wide, rng));
    CHECK(std::count(mo.begin(), mo.end(), wide.clamp(implied)) == 3);
    CHECK(std::count(ma.begin(), ma.end(), wide.clamp(implied)) == 3);
  }
}

TEST_CASE("inter share at gimbal lock is skipped without drawing randomness") {
  // Peers chosen so that the implied T12 has ry = pi/2.
  const RigidTransform target = pose_to_transform(Pose6(0.2, kPi / 2, 0.1, 0, 0, 0));
  const RigidTransform t23 = pose_to_transform(Pose6(0.3, 0.1, -0.2, 0.1, 0, 0));
  const RigidTransform t31 = invert(compose(t23, target));
  REQUIRE(loop_residual(target, t23, t31) < 1e-9);
  // t31 * t23 * target = I  =>  implied T12 = target.
  std::array<Pose6, 3> peers{Pose6(), transform_to_pose(t23), Pose6()};
  try {
    peers[2] = transform_to_pose(t31);
  } catch (const DegeneratePoseError& e) {
    peers[2] = e.pose();
  }
  CHECK_THROWS_AS(implied_pose(1, peers), DegeneratePoseError);
  Rng rng(54), untouched(54);
  std::vector<Pose6> mo(10), ma(10);
  const Bounds wide{Pose6(-kPi, -kPi, -kPi, -5, -5, -5), Pose6(kPi, kPi, kPi, 5, 5, 5)};
  CHECK_FALSE(inter_share(1, mo, ma, peers, 2, wide, rng));
  CHECK(rng.uniform() == untouched.uniform());
  CHECK(std::count(mo.begin(), mo.end(), Pose6()) == 10);
}

TEST_CASE("run: trace, frames and determinism") {
  const SyntheticProblem& prob = small_problem();
  const RunReport one = run(prob.problem, quick(10, 1));
  CHECK(one.trace.size() == 1);
  CHECK(convergence_csv(one).find("\n1,") != std::string::npos);

  MTConfig cfg = quick(12, 4);
  const RunReport a = run(prob.problem, cfg);
  cfg.threads = 3;
  const RunReport b = run(prob.problem, cfg);
  CHECK(report_json(a) == report_json(b));
  CHECK(convergence_csv(a) == convergence_csv(b));
  CHECK(a.evaluations == 6 * 12 * 5);
  CHECK(a.trace.size() == 4);
  for (std::size_t g = 1; g < a.trace.size(); ++g)
    for (std::size_t s = 0; s < kTaskCount; ++s) CHECK(a.trace[g][s] <= a.trace[g - 1][s]);
  CHECK(a.final_costs == a.trace.back());
  REQUIRE(a.rotation_error.has_value());
  CHECK(*a.rotation_error == rotation_error(a.transforms, prob.ground_truth()));
  CHECK(a.loop_residual == loop_residual(a.transforms[0], a.transforms[1], a.transforms[2]));

  // Reported T_k applied to raw P^k equals the decentralized chain, un-shifted.
  for (std::size_t k = 0; k < 3; ++k) {
    const Decentralized src = decentralize(prob.problem.clouds[k]);
    const Decentralized dst = decentralize(prob.problem.clouds[(k + 1) % 3]);
    const RigidTransform dec = pose_to_transform(a.decentralized_poses[k]);
    for (std::size_t i = 0; i < src.cloud.size(); i += 37) {
      const Vec3 direct = a.transforms[k].apply(prob.problem.clouds[k][i]);
      const Vec3 chain = dec.apply(src.cloud[i]) + dst.offset;
      REQUIRE((direct - chain).norm() < 1e-9);
    }
  }

  cfg.seed = 78;
  CHECK(report_json(run(prob.problem, cfg)) != report_json(a));
}

TEST_CASE("run: alpha 0, epsilon override and subsampling") {
  const SyntheticProblem& prob = small_problem();
  MTConfig cfg = quick(8, 2);
  cfg.alpha = 0.0;
  const RunReport r = run(prob.problem, cfg);
  CHECK(r.alpha == 0.0);
  CHECK(r.loop_residual >= 0.0);
  CHECK(r.final_costs[1] <= 1.0);

  cfg.epsilon_override = 0.05;
  CHECK(run(prob.problem, cfg).epsilon == 0.05);

  cfg.epsilon_override.reset();
  cfg.sample_ratio = 0.5;
  const RunReport half = run(prob.problem, cfg);
  CHECK(half.epsilon > r.epsilon);  // sparser clouds, wider threshold
  CHECK(report_json(half) == report_json(run(prob.problem, cfg)));

  const RegistrationProblem no_gt{prob.problem.clouds, std::nullopt};
  const RunReport plain_run = run(no_gt, quick(8, 1));
  CHECK_FALSE(plain_run.rotation_error.has_value());
  CHECK(report_json(plain_run).find("rotation_error") == std::string::npos);
}

TEST_CASE("report files") {
  const SyntheticProblem& prob = small_problem();
  const RunReport r = run(prob.problem, quick(8, 2));
  TempDir dir("report");
  write_report(r, dir.path());
  write_aligned(r, prob.problem, dir.path());

  const auto j = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(j["seed"] == 77);
  CHECK(j["generations"] == 2);
  CHECK(j["transforms"]["T31"].size() == 4);
  CHECK(j["transforms"]["T12"][3] == nlohmann::json::array({0.0, 0.0, 0.0, 1.0}));
  CHECK(j["final_costs"]["J2-o"].get<double>() == r.final_costs[3]);
  CHECK(j["loop_residual"].get<double>() == r.loop_residual);
  CHECK(j["rotation_error_x1000"].get<double>() == *r.rotation_error * 1000.0);
  CHECK_FALSE(j.contains("wall_seconds"));

  const std::string csv = slurp(dir / "convergence.csv");
  CHECK(csv.rfind("generation,J1-a,J1-o,J2-a,J2-o,J3-a,J3-o\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

  // Aligned clouds: cloud 2 reaches frame 1 through T12^-1, cloud 3 through T31.
  const PointCloud a2 = load_ply(dir / "aligned_2.ply");
  const PointCloud a3 = load_ply(dir / "aligned_3.ply");
  CHECK((a2[0] - invert(r.transforms[0]).apply(prob.problem.clouds[1][0])).norm() < 1e-12);
  CHECK((a3[5] - r.transforms[2].apply(prob.problem.clouds[2][5])).norm() < 1e-12);
  CHECK(load_ply(dir / "aligned_1.ply").size() == prob.problem.clouds[0].size());
}

TEST_CASE("thread count resolution") {
  CHECK(resolve_threads(3) >= 1);
  ::setenv("MTPCR_THREADS", "2", 1);
  CHECK(resolve_threads(8) == 2);
  CHECK(resolve_threads(1) == 1);
  ::setenv("MTPCR_THREADS", "junk", 1);
  CHECK(resolve_threads(5) == 5);
  ::unsetenv("MTPCR_THREADS");
}
