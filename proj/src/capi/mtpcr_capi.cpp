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

#include "mtpcr/mtpcr.h"

#include <cstring>
#include <new>
#include <string>

#include "core/bench.hpp"
#include "core/multitask.hpp"
#include "core/report_io.hpp"

struct mtpcr_cloud {
  mtpcr::PointCloud cloud;
};

struct mtpcr_problem {
  mtpcr_cloud clouds[3];
  std::optional<std::array<mtpcr::RigidTransform, 3>> ground_truth;
  bool synthetic = false;
  std::array<double, 3> overlaps{};
  std::array<double, 3> achieved{};
  double sigma = 0.0;
  std::uint64_t seed = 0;

  mtpcr::RegistrationProblem registration() const {
    return {{clouds[0].cloud, clouds[1].cloud, clouds[2].cloud}, ground_truth};
  }
};

struct mtpcr_report {
  mtpcr::RunReport report;
};

namespace {

thread_local std::string last_error;

mtpcr_status from_code(mtpcr::ErrorCode code) {
  using mtpcr::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return MTPCR_ERR_INVALID_ARGUMENT;
    case ErrorCode::DegeneratePose: return MTPCR_ERR_DEGENERATE_POSE;
    case ErrorCode::FileNotFound: return MTPCR_ERR_FILE_NOT_FOUND;
    case ErrorCode::MalformedHeader: return MTPCR_ERR_MALFORMED_HEADER;
    case ErrorCode::NonFiniteCoordinate: return MTPCR_ERR_NON_FINITE;
    case ErrorCode::EmptyCloud: return MTPCR_ERR_EMPTY_CLOUD;
    case ErrorCode::Io: return MTPCR_ERR_IO;
    case ErrorCode::Config: return MTPCR_ERR_CONFIG;
    case ErrorCode::Generation: return MTPCR_ERR_GENERATION;
  }
  return MTPCR_ERR_INTERNAL;
}

mtpcr_status fail(mtpcr_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

// Runs `body` and converts any exception into a status plus message.
template <class F>
mtpcr_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return MTPCR_OK;
  } catch (const mtpcr::Error& e) {
    return fail(from_code(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(MTPCR_ERR_OUT_OF_MEMORY, "out of memory");
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(MTPCR_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(MTPCR_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MTPCR_ERR_INTERNAL, "unknown failure");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw mtpcr::Error(mtpcr::ErrorCode::InvalidArgument, what);
}

void copy_matrix(const mtpcr::RigidTransform& t, double out[16]) {
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out[4 * r + c] = t.matrix()(r, c);
}

mtpcr::MTConfig to_config(const mtpcr_options& o) {
  mtpcr::MTConfig c;
  c.pop_size = o.pop_size;
  c.generations = o.generations;
  c.p_intra = o.p_intra;
  c.p_inter = o.p_inter;
  c.top_ratio = o.top_ratio;
  c.scale_factor = o.scale_factor;
  c.alpha = o.alpha;
  if (o.epsilon > 0.0) c.epsilon_override = o.epsilon;
  c.sample_ratio = o.sample_ratio;
  c.seed = o.seed;
  c.threads = o.threads;
  return c;
}

mtpcr_problem* wrap(const mtpcr::SyntheticProblem& p) {
  const auto& c = p.problem.clouds;
  auto* out = new mtpcr_problem{{{c[0]}, {c[1]}, {c[2]}}, p.problem.ground_truth};
  out->synthetic = true;
  out->overlaps = p.overlaps;
  out->achieved = p.achieved;
  out->sigma = p.sigma;
  out->seed = p.seed;
  return out;
}

}  // namespace

extern "C" {

const char* mtpcr_version(void) { return "1.0.0"; }

const char* mtpcr_status_string(mtpcr_status status) {
  switch (status) {
    case MTPCR_OK: return "ok";
    case MTPCR_ERR_INVALID_ARGUMENT: return "invalid argument";
    case MTPCR_ERR_DEGENERATE_POSE: return "degenerate pose";
    case MTPCR_ERR_FILE_NOT_FOUND: return "file not found";
    case MTPCR_ERR_MALFORMED_HEADER: return "malformed header";
    case MTPCR_ERR_NON_FINITE: return "non-finite coordinate";
    case MTPCR_ERR_EMPTY_CLOUD: return "empty cloud";
    case MTPCR_ERR_IO: return "i/o error";
    case MTPCR_ERR_CONFIG: return "invalid configuration";
    case MTPCR_ERR_GENERATION: return "generation failed";
    case MTPCR_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case MTPCR_ERR_OUT_OF_MEMORY: return "out of memory";
    case MTPCR_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* mtpcr_last_error(void) { return last_error.c_str(); }

void mtpcr_options_default(mtpcr_options* options) {
  if (!options) return;
  const mtpcr::MTConfig c;
  options->pop_size = c.pop_size;
  options->generations = c.generations;
  options->p_intra = c.p_intra;
  options->p_inter = c.p_inter;
  options->top_ratio = c.top_ratio;
  options->scale_factor = c.scale_factor;
  options->alpha = c.alpha;
  options->epsilon = 0.0;
  options->sample_ratio = c.sample_ratio;
  options->seed = c.seed;
  options->threads = c.threads;
}

/* clouds */

mtpcr_status mtpcr_cloud_load(const char* path, mtpcr_cloud** out) {
  return guarded([&] {
    require(path && out, "path and out must not be null");
    *out = new mtpcr_cloud{mtpcr::load_ply(path)};
  });
}

mtpcr_status mtpcr_cloud_save(const mtpcr_cloud* cloud, const char* path, int binary) {
  return guarded([&] {
    require(cloud && path, "cloud and path must not be null");
    mtpcr::save_ply(cloud->cloud, path,
                    binary ? mtpcr::PlyFormat::BinaryLittleEndian : mtpcr::PlyFormat::Ascii);
  });
}

mtpcr_status mtpcr_cloud_from_xyz(const double* xyz, size_t count, mtpcr_cloud** out) {
  return guarded([&] {
    require(out && (xyz || count == 0), "xyz and out must not be null");
    std::vector<mtpcr::Vec3> points;
    points.reserve(count);
    for (size_t i = 0; i < count; ++i)
      points.emplace_back(xyz[3 * i], xyz[3 * i + 1], xyz[3 * i + 2]);
    *out = new mtpcr_cloud{mtpcr::PointCloud(std::move(points))};
  });
}

size_t mtpcr_cloud_size(const mtpcr_cloud* cloud) { return cloud ? cloud->cloud.size() : 0; }

mtpcr_status mtpcr_cloud_points(const mtpcr_cloud* cloud, double* xyz, size_t capacity) {
  if (!cloud || !xyz) return fail(MTPCR_ERR_INVALID_ARGUMENT, "cloud and xyz must not be null");
  if (capacity < cloud->cloud.size())
    return fail(MTPCR_ERR_BUFFER_TOO_SMALL, "buffer holds fewer points than the cloud");
  size_t i = 0;
  for (const mtpcr::Vec3& p : cloud->cloud.points()) {
    xyz[i++] = p.x();
    xyz[i++] = p.y();
    xyz[i++] = p.z();
  }
  return MTPCR_OK;
}

mtpcr_status mtpcr_cloud_mean_nn(const mtpcr_cloud* cloud, double* out) {
  return guarded([&] {
    require(cloud && out, "cloud and out must not be null");
    *out = mtpcr::mean_nn_distance(cloud->cloud);
  });
}

mtpcr_status mtpcr_cloud_make_base(size_t n, uint64_t seed, mtpcr_cloud** out) {
  return guarded([&] {
    require(out, "out must not be null");
    *out = new mtpcr_cloud{mtpcr::make_base_cloud(n, seed)};
  });
}

mtpcr_status mtpcr_cloud_add_noise(const mtpcr_cloud* cloud, double sigma, uint64_t seed,
                                   mtpcr_cloud** out) {
  return guarded([&] {
    require(cloud && out, "cloud and out must not be null");
    *out = new mtpcr_cloud{mtpcr::add_noise(cloud->cloud, sigma, seed)};
  });
}

void mtpcr_cloud_free(mtpcr_cloud* cloud) { delete cloud; }

/* problems */

mtpcr_status mtpcr_problem_generate(const mtpcr_cloud* base, const double overlaps[3],
                                    double sigma, uint64_t seed, int full_range,
                                    mtpcr_problem** out) {
  return guarded([&] {
    require(base && overlaps && out, "base, overlaps and out must not be null");
    mtpcr::GenerateOptions options;
    options.full_range = full_range != 0;
    *out = wrap(mtpcr::generate(base->cloud, {overlaps[0], overlaps[1], overlaps[2]}, sigma,
                                seed, options));
  });
}

mtpcr_status mtpcr_problem_from_clouds(const mtpcr_cloud* c1, const mtpcr_cloud* c2,
                                       const mtpcr_cloud* c3, mtpcr_problem** out) {
  return guarded([&] {
    require(c1 && c2 && c3 && out, "clouds and out must not be null");
    *out = new mtpcr_problem{{*c1, *c2, *c3}, std::nullopt};
  });
}

mtpcr_status mtpcr_problem_load(const char* dir, mtpcr_problem** out) {
  return guarded([&] {
    require(dir && out, "dir and out must not be null");
    *out = wrap(mtpcr::load_problem(dir));
  });
}

mtpcr_status mtpcr_problem_save(const mtpcr_problem* problem, const char* dir) {
  return guarded([&] {
    require(problem && dir, "problem and dir must not be null");
    require(problem->synthetic && problem->ground_truth.has_value(),
            "only synthetic problems can be saved");
    mtpcr::save_problem({problem->registration(), problem->overlaps, problem->achieved,
                         problem->sigma, problem->seed},
                        dir);
  });
}

mtpcr_status mtpcr_problem_load_ground_truth(mtpcr_problem* problem, const char* manifest) {
  return guarded([&] {
    require(problem && manifest, "problem and manifest must not be null");
    problem->ground_truth = mtpcr::read_ground_truth(manifest);
  });
}

const mtpcr_cloud* mtpcr_problem_cloud(const mtpcr_problem* problem, int index) {
  if (!problem || index < 0 || index > 2) return nullptr;
  return &problem->clouds[index];
}

int mtpcr_problem_has_ground_truth(const mtpcr_problem* problem) {
  return problem && problem->ground_truth ? 1 : 0;
}

mtpcr_status mtpcr_problem_ground_truth(const mtpcr_problem* problem, int index,
                                        double out[16]) {
  if (!problem || !out || index < 0 || index > 2)
    return fail(MTPCR_ERR_INVALID_ARGUMENT, "need a problem, an output and index 0..2");
  if (!problem->ground_truth)
    return fail(MTPCR_ERR_INVALID_ARGUMENT, "problem has no ground truth");
  copy_matrix((*problem->ground_truth)[index], out);
  return MTPCR_OK;
}

mtpcr_status mtpcr_problem_overlaps(const mtpcr_problem* problem, double achieved[3]) {
  if (!problem || !achieved)
    return fail(MTPCR_ERR_INVALID_ARGUMENT, "problem and output must not be null");
  if (!problem->synthetic)
    return fail(MTPCR_ERR_INVALID_ARGUMENT, "overlaps are known only for synthetic problems");
  for (int k = 0; k < 3; ++k) achieved[k] = problem->achieved[k];
  return MTPCR_OK;
}

void mtpcr_problem_free(mtpcr_problem* problem) { delete problem; }

/* registration */

mtpcr_status mtpcr_register(const mtpcr_problem* problem, const mtpcr_options* options,
                            mtpcr_report** out) {
  return guarded([&] {
    require(problem && out, "problem and out must not be null");
    mtpcr_options o;
    mtpcr_options_default(&o);
    if (options) o = *options;
    *out = new mtpcr_report{mtpcr::run(problem->registration(), to_config(o))};
  });
}

mtpcr_status mtpcr_report_summary(const mtpcr_report* report, mtpcr_summary* out) {
  if (!report || !out) return fail(MTPCR_ERR_INVALID_ARGUMENT, "report and out must not be null");
  const mtpcr::RunReport& r = report->report;
  *out = mtpcr_summary{};
  out->seed = r.seed;
  out->generations = r.generations;
  out->evaluations = r.evaluations;
  out->inter_share_skips = r.inter_share_skips;
  out->epsilon = r.epsilon;
  out->shift = r.shift;
  out->alpha = r.alpha;
  out->loop_residual = r.loop_residual;
  out->has_ground_truth = r.rotation_error ? 1 : 0;
  out->rotation_error = r.rotation_error.value_or(0.0);
  out->translation_error = r.translation_error.value_or(0.0);
  for (std::size_t s = 0; s < mtpcr::kTaskCount; ++s) out->final_costs[s] = r.final_costs[s];
  out->wall_seconds = r.wall_seconds;
  return MTPCR_OK;
}

mtpcr_status mtpcr_report_transform(const mtpcr_report* report, int index, double out[16]) {
  if (!report || !out || index < 0 || index > 2)
    return fail(MTPCR_ERR_INVALID_ARGUMENT, "need a report, an output and index 0..2");
  copy_matrix(report->report.transforms[index], out);
  return MTPCR_OK;
}

size_t mtpcr_report_trace_rows(const mtpcr_report* report) {
  return report ? report->report.trace.size() : 0;
}

mtpcr_status mtpcr_report_trace(const mtpcr_report* report, double* out,
                                size_t capacity_rows) {
  if (!report || !out) return fail(MTPCR_ERR_INVALID_ARGUMENT, "report and out must not be null");
  const auto& trace = report->report.trace;
  if (capacity_rows < trace.size())
    return fail(MTPCR_ERR_BUFFER_TOO_SMALL, "buffer holds fewer rows than the trace");
  for (const auto& row : trace) out = std::copy(row.begin(), row.end(), out);
  return MTPCR_OK;
}

mtpcr_status mtpcr_report_json(const mtpcr_report* report, char* buf, size_t capacity,
                               size_t* needed) {
  std::string text;
  const mtpcr_status st = guarded([&] {
    require(report, "report must not be null");
    text = mtpcr::report_json(report->report);
  });
  if (st != MTPCR_OK) return st;
  if (needed) *needed = text.size() + 1;
  if (!buf || capacity < text.size() + 1)
    return fail(MTPCR_ERR_BUFFER_TOO_SMALL, "json buffer too small");
  std::memcpy(buf, text.c_str(), text.size() + 1);
  return MTPCR_OK;
}

mtpcr_status mtpcr_report_write(const mtpcr_report* report, const char* dir) {
  return guarded([&] {
    require(report && dir, "report and dir must not be null");
    mtpcr::write_report(report->report, dir);
  });
}

mtpcr_status mtpcr_report_write_aligned(const mtpcr_report* report,
                                        const mtpcr_problem* problem, const char* dir) {
  return guarded([&] {
    require(report && problem && dir, "report, problem and dir must not be null");
    mtpcr::write_aligned(report->report, problem->registration(), dir);
  });
}

void mtpcr_report_free(mtpcr_report* report) { delete report; }

}  // extern "C"
