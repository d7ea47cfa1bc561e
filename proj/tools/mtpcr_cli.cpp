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

// mtpcr: register three point clouds, or benchmark the registration on
// synthetic problems. Talks to the library only through the C API.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "mtpcr/mtpcr.h"

namespace fs = std::filesystem;

namespace {

struct CloudDeleter {
  void operator()(mtpcr_cloud* c) const { mtpcr_cloud_free(c); }
};
struct ProblemDeleter {
  void operator()(mtpcr_problem* p) const { mtpcr_problem_free(p); }
};
struct ReportDeleter {
  void operator()(mtpcr_report* r) const { mtpcr_report_free(r); }
};
using Cloud = std::unique_ptr<mtpcr_cloud, CloudDeleter>;
using Problem = std::unique_ptr<mtpcr_problem, ProblemDeleter>;
using Report = std::unique_ptr<mtpcr_report, ReportDeleter>;

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(mtpcr_status st, const std::string& what) {
  if (st != MTPCR_OK)
    throw Failure(what + ": " + mtpcr_status_string(st) + " (" + mtpcr_last_error() + ")");
}

// Locale-independent, round-trippable.
std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* kTasks[6] = {"J1-a", "J1-o", "J2-a", "J2-o", "J3-a", "J3-o"};
const char* kNames[3] = {"T12", "T23", "T31"};

struct Settings {
  mtpcr_options options{};
  std::string out = "mtpcr_out";
  // register
  std::vector<std::string> clouds;
  std::string gt;
  bool emit_aligned = false;
  // problem source for bench, sweep and generate
  std::string problem_dir;
  std::size_t base_points = 2000;
  std::uint64_t base_seed = 7;
  std::vector<double> overlaps{0.8, 0.6, 0.6};
  double sigma = 0.0;
  std::uint64_t problem_seed = 1;
  bool full_range = false;
  // repeats
  std::vector<std::uint64_t> seeds;
  std::size_t repeats = 1;
  // sweep grid
  std::vector<double> alphas;
  std::vector<double> probs;
  std::vector<double> ratios;
};

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << body;
  if (!out) throw Failure("cannot write " + path.string());
}

Problem make_problem(const Settings& s) {
  mtpcr_problem* p = nullptr;
  if (!s.problem_dir.empty()) {
    check(mtpcr_problem_load(s.problem_dir.c_str(), &p), "loading " + s.problem_dir);
    return Problem(p);
  }
  mtpcr_cloud* base = nullptr;
  check(mtpcr_cloud_make_base(s.base_points, s.base_seed, &base), "building the base cloud");
  Cloud owned(base);
  if (s.overlaps.size() != 3) throw Failure("--overlaps takes exactly three ratios");
  check(mtpcr_problem_generate(base, s.overlaps.data(), s.sigma, s.problem_seed, s.full_range,
                               &p),
        "generating the problem");
  return Problem(p);
}

std::vector<std::uint64_t> run_seeds(const Settings& s) {
  if (!s.seeds.empty()) return s.seeds;
  std::vector<std::uint64_t> out;
  for (std::size_t r = 0; r < s.repeats; ++r) out.push_back(s.options.seed + r);
  return out;
}

void print_transforms(const mtpcr_report* report) {
  for (int k = 0; k < 3; ++k) {
    double m[16];
    check(mtpcr_report_transform(report, k, m), "reading transforms");
    std::printf("%s\n", kNames[k]);
    for (int r = 0; r < 4; ++r)
      std::printf("  % .9f % .9f % .9f % .9f\n", m[4 * r], m[4 * r + 1], m[4 * r + 2],
                  m[4 * r + 3]);
  }
}

int cmd_register(const Settings& s) {
  if (s.clouds.size() != 3) throw Failure("register needs exactly three PLY files");
  std::vector<Cloud> clouds;
  for (const std::string& path : s.clouds) {
    mtpcr_cloud* c = nullptr;
    check(mtpcr_cloud_load(path.c_str(), &c), "loading " + path);
    clouds.emplace_back(c);
  }
  mtpcr_problem* p = nullptr;
  check(mtpcr_problem_from_clouds(clouds[0].get(), clouds[1].get(), clouds[2].get(), &p),
        "assembling the problem");
  Problem problem(p);
  if (!s.gt.empty())
    check(mtpcr_problem_load_ground_truth(p, s.gt.c_str()), "reading " + s.gt);

  mtpcr_report* r = nullptr;
  check(mtpcr_register(p, &s.options, &r), "registration");
  Report report(r);
  check(mtpcr_report_write(r, s.out.c_str()), "writing the report");
  if (s.emit_aligned)
    check(mtpcr_report_write_aligned(r, p, s.out.c_str()), "writing aligned clouds");

  mtpcr_summary sum;
  check(mtpcr_report_summary(r, &sum), "summary");
  print_transforms(r);
  std::printf("loop residual %.6g\n", sum.loop_residual);
  if (sum.has_ground_truth)
    std::printf("Err_R %.6g (x1000 %.3f)  Err_T %.6g (x1000 %.3f)\n", sum.rotation_error,
                sum.rotation_error * 1000.0, sum.translation_error,
                sum.translation_error * 1000.0);
  std::printf("epsilon %.6g  evaluations %zu  wall %.2f s\n", sum.epsilon, sum.evaluations,
              sum.wall_seconds);
  std::printf("report written to %s\n", s.out.c_str());
  return 0;
}

int cmd_generate(const Settings& s) {
  Problem p = make_problem(s);
  check(mtpcr_problem_save(p.get(), s.out.c_str()), "saving the problem");
  double achieved[3];
  check(mtpcr_problem_overlaps(p.get(), achieved), "reading overlaps");
  std::printf("views: %zu %zu %zu points, overlaps %.3f %.3f %.3f, written to %s\n",
              mtpcr_cloud_size(mtpcr_problem_cloud(p.get(), 0)),
              mtpcr_cloud_size(mtpcr_problem_cloud(p.get(), 1)),
              mtpcr_cloud_size(mtpcr_problem_cloud(p.get(), 2)), achieved[0], achieved[1],
              achieved[2], s.out.c_str());
  return 0;
}

struct Stats {
  double mean = 0.0, std = 0.0;
};

Stats stats(const std::vector<double>& v) {
  Stats s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  for (double x : v) s.std += (x - s.mean) * (x - s.mean);
  s.std = v.size() > 1 ? std::sqrt(s.std / static_cast<double>(v.size() - 1)) : 0.0;
  return s;
}

struct BenchResult {
  std::vector<std::uint64_t> seeds;
  std::vector<mtpcr_summary> runs;
  std::vector<std::uint64_t> failed;
};

BenchResult bench(const mtpcr_problem* problem, mtpcr_options options,
                  const std::vector<std::uint64_t>& seeds) {
  BenchResult out;
  for (std::uint64_t seed : seeds) {
    options.seed = seed;
    mtpcr_report* r = nullptr;
    if (mtpcr_register(problem, &options, &r) != MTPCR_OK) {
      std::fprintf(stderr, "seed %llu failed: %s\n", static_cast<unsigned long long>(seed),
                   mtpcr_last_error());
      out.failed.push_back(seed);
      continue;
    }
    Report report(r);
    mtpcr_summary sum;
    check(mtpcr_report_summary(r, &sum), "summary");
    out.seeds.push_back(seed);
    out.runs.push_back(sum);
    std::printf("seed %llu  Err_R %.6g  Err_T %.6g  loop %.6g  (%.1f s)\n",
                static_cast<unsigned long long>(seed), sum.rotation_error,
                sum.translation_error, sum.loop_residual, sum.wall_seconds);
    std::fflush(stdout);
  }
  return out;
}

double mean_original_cost(const mtpcr_summary& s) {
  return (s.final_costs[1] + s.final_costs[3] + s.final_costs[5]) / 3.0;
}

int report_failures(const std::vector<std::uint64_t>& failed) {
  if (failed.empty()) return 0;
  std::fprintf(stderr, "failed seeds:");
  for (auto f : failed) std::fprintf(stderr, " %llu", static_cast<unsigned long long>(f));
  std::fprintf(stderr, "\n");
  return 1;
}

int cmd_bench(const Settings& s) {
  Problem problem = make_problem(s);
  if (!mtpcr_problem_has_ground_truth(problem.get()))
    throw Failure("bench needs a problem with ground truth");
  const BenchResult res = bench(problem.get(), s.options, run_seeds(s));
  fs::create_directories(s.out);

  std::string runs = "seed,err_r,err_t,err_r_x1000,err_t_x1000,loop_residual";
  for (const char* t : kTasks) runs += std::string(",") + t;
  runs += "\n";
  std::vector<double> err_r, err_t, loop;
  for (std::size_t i = 0; i < res.runs.size(); ++i) {
    const mtpcr_summary& r = res.runs[i];
    runs += std::to_string(res.seeds[i]) + "," + num(r.rotation_error) + "," +
            num(r.translation_error) + "," + num(r.rotation_error * 1000.0) + "," +
            num(r.translation_error * 1000.0) + "," + num(r.loop_residual);
    for (double c : r.final_costs) runs += "," + num(c);
    runs += "\n";
    err_r.push_back(r.rotation_error);
    err_t.push_back(r.translation_error);
    loop.push_back(r.loop_residual);
  }
  write_file(fs::path(s.out) / "runs.csv", runs);

  std::string costs = "task,best_cost,avg_cost\n";
  for (int t = 0; t < 6; ++t) {
    if (res.runs.empty()) break;
    double best = res.runs[0].final_costs[t], sum = 0.0;
    for (const auto& r : res.runs) {
      best = std::min(best, r.final_costs[t]);
      sum += r.final_costs[t];
    }
    costs += std::string(kTasks[t]) + "," + num(best) + "," +
             num(sum / static_cast<double>(res.runs.size())) + "\n";
  }
  write_file(fs::path(s.out) / "costs.csv", costs);

  std::string summary = "metric,mean,std\n";
  for (auto [name, v] : {std::pair{"err_r", &err_r}, {"err_t", &err_t}, {"loop_residual", &loop}}) {
    const Stats st = stats(*v);
    summary += std::string(name) + "," + num(st.mean) + "," + num(st.std) + "\n";
    std::printf("%-14s %.6g +- %.6g\n", name, st.mean, st.std);
  }
  write_file(fs::path(s.out) / "summary.csv", summary);
  std::printf("%zu runs written to %s\n", res.runs.size(), s.out.c_str());
  return report_failures(res.failed);
}

int cmd_sweep(const Settings& s) {
  Problem problem = make_problem(s);
  if (!mtpcr_problem_has_ground_truth(problem.get()))
    throw Failure("sweep needs a problem with ground truth");
  const std::vector<double> alphas = s.alphas.empty() ? std::vector{s.options.alpha} : s.alphas;
  const std::vector<double> probs = s.probs.empty() ? std::vector{s.options.p_intra} : s.probs;
  const std::vector<double> ratios =
      s.ratios.empty() ? std::vector{s.options.sample_ratio} : s.ratios;
  const auto seeds = run_seeds(s);
  fs::create_directories(s.out);

  std::string table =
      "alpha,p,sample_ratio,runs,err_r_mean,err_r_std,err_t_mean,err_t_std,"
      "loop_mean,loop_std,original_cost_mean\n";
  std::vector<std::uint64_t> failed;
  for (double a : alphas)
    for (double p : probs)
      for (double ratio : ratios) {
        std::printf("cell alpha=%g p=%g ratio=%g\n", a, p, ratio);
        mtpcr_options o = s.options;
        o.alpha = a;
        o.p_intra = o.p_inter = p;
        o.sample_ratio = ratio;
        const BenchResult res = bench(problem.get(), o, seeds);
        failed.insert(failed.end(), res.failed.begin(), res.failed.end());
        std::vector<double> er, et, lp, cost;
        for (const auto& r : res.runs) {
          er.push_back(r.rotation_error);
          et.push_back(r.translation_error);
          lp.push_back(r.loop_residual);
          cost.push_back(mean_original_cost(r));
        }
        const Stats R = stats(er), T = stats(et), L = stats(lp), C = stats(cost);
        table += num(a) + "," + num(p) + "," + num(ratio) + "," +
                 std::to_string(res.runs.size()) + "," + num(R.mean) + "," + num(R.std) +
                 "," + num(T.mean) + "," + num(T.std) + "," + num(L.mean) + "," +
                 num(L.std) + "," + num(C.mean) + "\n";
      }
  write_file(fs::path(s.out) / "sweep.csv", table);
  std::printf("%zu cells written to %s\n", alphas.size() * probs.size() * ratios.size(),
              (fs::path(s.out) / "sweep.csv").string().c_str());
  return report_failures(failed);
}

}  // namespace

int main(int argc, char** argv) {
  Settings s;
  mtpcr_options_default(&s.options);

  CLI::App app{"Three-view point cloud registration by evolutionary multitasking"};
  app.set_config("--config", "", "Flat key=value file; command-line flags win");
  app.require_subcommand(1);

  auto& o = s.options;
  app.add_option("--seed", o.seed, "Random seed (first seed for repeats)");
  app.add_option("--generations", o.generations, "Generations");
  app.add_option("--pop-size", o.pop_size, "Individuals per task");
  app.add_option("--p-intra", o.p_intra, "Intra-task sharing probability");
  app.add_option("--p-inter", o.p_inter, "Inter-task sharing probability");
  app.add_option("--top-ratio", o.top_ratio, "Archive fraction");
  app.add_option("--alpha", o.alpha, "Loop-term weight");
  app.add_option("--scale-factor", o.scale_factor, "DE scale factor F");
  app.add_option("--sample-ratio", o.sample_ratio, "Fraction of points used for fitness");
  app.add_option("--epsilon", o.epsilon, "Inlier threshold override (<= 0: adaptive)");
  app.add_option("--threads", o.threads, "Evaluation threads (0: MTPCR_THREADS or all cores)");
  app.add_option("--out", s.out, "Output directory");

  app.add_option("--problem", s.problem_dir, "Load a saved synthetic problem")
      ->check(CLI::ExistingDirectory);
  app.add_option("--base-points", s.base_points, "Points in the built-in base cloud");
  app.add_option("--base-seed", s.base_seed, "Seed of the base cloud");
  app.add_option("--overlaps", s.overlaps, "Overlap ratios of pairs (1,2) (2,3) (3,1)")
      ->delimiter(',')
      ->expected(3);
  app.add_option("--sigma", s.sigma, "Noise level in normalized units");
  app.add_option("--problem-seed", s.problem_seed, "Seed of the generated problem");
  app.add_flag("--full-range", s.full_range, "Draw view rotations over [-pi, pi]");
  app.add_option("--seeds", s.seeds, "Explicit run seeds")->delimiter(',');
  app.add_option("--repeats", s.repeats, "Runs with seeds seed .. seed+repeats-1");
  app.add_option("--alphas", s.alphas, "Sweep values of alpha")->delimiter(',');
  app.add_option("--probs", s.probs, "Sweep values of p_intra = p_inter")->delimiter(',');
  app.add_option("--ratios", s.ratios, "Sweep values of the sample ratio")->delimiter(',');

  auto* reg = app.add_subcommand("register", "Register three PLY clouds");
  reg->add_option("clouds", s.clouds, "c1.ply c2.ply c3.ply")->expected(3)->required()
      ->check(CLI::ExistingFile);
  reg->add_option("--gt", s.gt, "Manifest with ground-truth T12 T23 T31")
      ->check(CLI::ExistingFile);
  reg->add_flag("--emit-aligned", s.emit_aligned, "Also write aligned_1..3.ply");
  auto* gen = app.add_subcommand("generate", "Write a synthetic three-view problem");
  auto* ben = app.add_subcommand("bench", "Repeated runs on one synthetic problem");
  auto* swp = app.add_subcommand("sweep", "Bench over an alpha x p x sample-ratio grid");
  for (auto* sub : {reg, gen, ben, swp}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (reg->parsed()) return cmd_register(s);
    if (gen->parsed()) return cmd_generate(s);
    if (ben->parsed()) return cmd_bench(s);
    if (swp->parsed()) return cmd_sweep(s);
  } catch (const Failure& e) {
    std::fprintf(stderr, "mtpcr: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mtpcr: %s\n", e.what());
    return 1;
  }
  return 1;
}
