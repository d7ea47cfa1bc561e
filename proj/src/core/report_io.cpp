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

#include "core/report_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "core/bench.hpp"

namespace mtpcr {

namespace fs = std::filesystem;

std::string format_number(double v) {
  char buf[40];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  (void)ec;
  return std::string(buf, end);
}

void write_text(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << body;
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

namespace {

const char* kTransformNames[3] = {"T12", "T23", "T31"};

nlohmann::ordered_json matrix_json(const RigidTransform& t) {
  auto rows = nlohmann::ordered_json::array();
  for (int r = 0; r < 4; ++r) {
    auto row = nlohmann::ordered_json::array();
    for (int c = 0; c < 4; ++c) row.push_back(t.matrix()(r, c));
    rows.push_back(row);
  }
  return rows;
}

std::string task_label(std::size_t slot) {
  return TaskId{static_cast<int>(slot / 2) + 1,
                slot % 2 == 0 ? TaskKind::Aiding : TaskKind::Original}
      .label();
}

std::string matrix_line(const char* name, const RigidTransform& t) {
  std::string line = name;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) line += " " + format_number(t.matrix()(r, c));
  return line + "\n";
}

}  // namespace

std::string report_json(const RunReport& report) {
  nlohmann::ordered_json j;
  j["seed"] = report.seed;
  j["generations"] = report.generations;
  j["epsilon"] = report.epsilon;
  j["shift"] = report.shift;
  j["alpha"] = report.alpha;
  auto transforms = nlohmann::ordered_json::object();
  for (int k = 0; k < 3; ++k) transforms[kTransformNames[k]] = matrix_json(report.transforms[k]);
  j["transforms"] = transforms;
  auto costs = nlohmann::ordered_json::object();
  for (std::size_t s = 0; s < kTaskCount; ++s) costs[task_label(s)] = report.final_costs[s];
  j["final_costs"] = costs;
  j["loop_residual"] = report.loop_residual;
  if (report.rotation_error) {
    j["rotation_error"] = *report.rotation_error;
    j["translation_error"] = *report.translation_error;
    j["rotation_error_x1000"] = *report.rotation_error * 1000.0;
    j["translation_error_x1000"] = *report.translation_error * 1000.0;
  }
  j["inter_share_skips"] = report.inter_share_skips;
  j["evaluations"] = report.evaluations;
  return j.dump(2) + "\n";
}

std::string convergence_csv(const RunReport& report) {
  std::string out = "generation";
  for (std::size_t s = 0; s < kTaskCount; ++s) out += "," + task_label(s);
  out += "\n";
  for (std::size_t g = 0; g < report.trace.size(); ++g) {
    out += std::to_string(g + 1);
    for (double v : report.trace[g]) out += "," + format_number(v);
    out += "\n";
  }
  return out;
}

void write_report(const RunReport& report, const fs::path& dir) {
  fs::create_directories(dir);
  write_text(dir / "report.json", report_json(report));
  write_text(dir / "convergence.csv", convergence_csv(report));
}

void write_aligned(const RunReport& report, const RegistrationProblem& problem,
                   const fs::path& dir) {
  fs::create_directories(dir);
  // Cloud 2 reaches frame 1 through T12^-1, cloud 3 through T31.
  save_ply(problem.clouds[0], dir / "aligned_1.ply");
  save_ply(apply_transform(problem.clouds[1], invert(report.transforms[0])),
           dir / "aligned_2.ply");
  save_ply(apply_transform(problem.clouds[2], report.transforms[2]), dir / "aligned_3.ply");
}

void save_problem(const SyntheticProblem& problem, const fs::path& dir) {
  fs::create_directories(dir);
  for (int k = 0; k < 3; ++k)
    save_ply(problem.problem.clouds[k], dir / ("view" + std::to_string(k + 1) + ".ply"));
  std::string manifest = "# mtpcr synthetic problem\n";
  manifest += "seed " + std::to_string(problem.seed) + "\n";
  manifest += "sigma " + format_number(problem.sigma) + "\n";
  manifest += "overlaps";
  for (double o : problem.overlaps) manifest += " " + format_number(o);
  manifest += "\nachieved";
  for (double o : problem.achieved) manifest += " " + format_number(o);
  manifest += "\n";
  for (int k = 0; k < 3; ++k) manifest += matrix_line(kTransformNames[k], problem.ground_truth()[k]);
  write_text(dir / "manifest.txt", manifest);
}

namespace {

struct Manifest {
  std::uint64_t seed = 0;
  double sigma = 0.0;
  std::array<double, 3> overlaps{};
  std::array<double, 3> achieved{};
  std::array<std::optional<RigidTransform>, 3> transforms;
};

Manifest parse_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
  Manifest m;
  std::string line;
  auto bad = [&](const std::string& why) {
    throw Error(ErrorCode::MalformedHeader, path.string() + ": " + why);
  };
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream words(line);
    words.imbue(std::locale::classic());
    std::string key;
    words >> key;
    if (key == "seed") {
      if (!(words >> m.seed)) bad("bad seed");
    } else if (key == "sigma") {
      if (!(words >> m.sigma)) bad("bad sigma");
    } else if (key == "overlaps" || key == "achieved") {
      auto& dst = key == "overlaps" ? m.overlaps : m.achieved;
      for (double& v : dst)
        if (!(words >> v)) bad("bad " + key);
    } else {
      int slot = -1;
      for (int k = 0; k < 3; ++k)
        if (key == kTransformNames[k]) slot = k;
      if (slot < 0) bad("unknown key '" + key + "'");
      Mat4 mat;
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
          if (!(words >> mat(r, c))) bad("bad matrix " + key);
      m.transforms[slot] = RigidTransform::from_matrix(mat);
    }
  }
  return m;
}

}  // namespace

std::array<RigidTransform, 3> read_ground_truth(const fs::path& manifest) {
  const Manifest m = parse_manifest(manifest);
  std::array<RigidTransform, 3> out;
  for (int k = 0; k < 3; ++k) {
    if (!m.transforms[k])
      throw Error(ErrorCode::MalformedHeader,
                  manifest.string() + ": missing " + kTransformNames[k]);
    out[k] = *m.transforms[k];
  }
  return out;
}

SyntheticProblem load_problem(const fs::path& dir) {
  const Manifest m = parse_manifest(dir / "manifest.txt");
  SyntheticProblem p{
      RegistrationProblem{{load_ply(dir / "view1.ply"), load_ply(dir / "view2.ply"),
                           load_ply(dir / "view3.ply")},
                          read_ground_truth(dir / "manifest.txt")},
      m.overlaps, m.achieved, m.sigma, m.seed};
  return p;
}

}  // namespace mtpcr
