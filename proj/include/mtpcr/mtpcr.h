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

#ifndef MTPCR_MTPCR_H
#define MTPCR_MTPCR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
  #ifdef MTPCR_BUILDING_LIBRARY
    #define MTPCR_API __declspec(dllexport)
  #else
    #define MTPCR_API __declspec(dllimport)
  #endif
#else
  #define MTPCR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/*
 * Multi-view (three cloud) registration by evolutionary multitasking.
 *
 * Every function returning mtpcr_status reports failure through the status
 * and a thread-local message readable with mtpcr_last_error(). Objects
 * returned through out-parameters are owned by the caller and released with
 * the matching *_free function. Free functions accept NULL.
 */

typedef enum mtpcr_status {
  MTPCR_OK = 0,
  MTPCR_ERR_INVALID_ARGUMENT = 1,
  MTPCR_ERR_DEGENERATE_POSE = 2,
  MTPCR_ERR_FILE_NOT_FOUND = 3,
  MTPCR_ERR_MALFORMED_HEADER = 4,
  MTPCR_ERR_NON_FINITE = 5,
  MTPCR_ERR_EMPTY_CLOUD = 6,
  MTPCR_ERR_IO = 7,
  MTPCR_ERR_CONFIG = 8,
  MTPCR_ERR_GENERATION = 9,
  MTPCR_ERR_BUFFER_TOO_SMALL = 10,
  MTPCR_ERR_OUT_OF_MEMORY = 11,
  MTPCR_ERR_INTERNAL = 12
} mtpcr_status;

typedef struct mtpcr_cloud mtpcr_cloud;     /* immutable point cloud */
typedef struct mtpcr_problem mtpcr_problem; /* three clouds, optional ground truth */
typedef struct mtpcr_report mtpcr_report;   /* result of one registration run */

typedef struct mtpcr_options {
  size_t pop_size;     /* individuals per task, >= 4 */
  size_t generations;  /* >= 1 */
  double p_intra;      /* intra-task sharing probability */
  double p_inter;      /* inter-task sharing probability */
  double top_ratio;    /* archive fraction, top_ratio * pop_size >= 1 */
  double scale_factor; /* DE F */
  double alpha;        /* loop-term weight */
  double epsilon;      /* inlier threshold; <= 0 selects the adaptive one */
  double sample_ratio; /* (0, 1]; 1 disables subsampling */
  uint64_t seed;
  unsigned threads;    /* 0 = hardware concurrency capped by MTPCR_THREADS */
} mtpcr_options;

typedef struct mtpcr_summary {
  uint64_t seed;
  size_t generations;
  size_t evaluations;
  size_t inter_share_skips;
  double epsilon;
  double shift;
  double alpha;
  double loop_residual;
  int has_ground_truth;     /* errors below are valid only when set */
  double rotation_error;    /* mean Frobenius norm over T12, T23, T31 */
  double translation_error; /* mean Euclidean norm */
  double final_costs[6];    /* J1-a, J1-o, J2-a, J2-o, J3-a, J3-o */
  double wall_seconds;
} mtpcr_summary;

MTPCR_API const char* mtpcr_version(void);
MTPCR_API const char* mtpcr_status_string(mtpcr_status status);
/* Message of the last failure on the calling thread ("" if none). */
MTPCR_API const char* mtpcr_last_error(void);

MTPCR_API void mtpcr_options_default(mtpcr_options* options);

/* ---- clouds ---- */

/* ascii or binary_little_endian PLY. */
MTPCR_API mtpcr_status mtpcr_cloud_load(const char* path, mtpcr_cloud** out);
/* binary != 0 writes binary_little_endian float64, otherwise ascii. */
MTPCR_API mtpcr_status mtpcr_cloud_save(const mtpcr_cloud* cloud, const char* path,
                                        int binary);
/* xyz holds count interleaved triples. */
MTPCR_API mtpcr_status mtpcr_cloud_from_xyz(const double* xyz, size_t count,
                                            mtpcr_cloud** out);
MTPCR_API size_t mtpcr_cloud_size(const mtpcr_cloud* cloud);
/* Copies the points into xyz (capacity counted in points). */
MTPCR_API mtpcr_status mtpcr_cloud_points(const mtpcr_cloud* cloud, double* xyz,
                                          size_t capacity);
MTPCR_API mtpcr_status mtpcr_cloud_mean_nn(const mtpcr_cloud* cloud, double* out);
/* Built-in synthetic test object with n surface points. */
MTPCR_API mtpcr_status mtpcr_cloud_make_base(size_t n, uint64_t seed, mtpcr_cloud** out);
/* Normalize to [-1, 1], add N(0, sigma) per coordinate, restore the scale. */
MTPCR_API mtpcr_status mtpcr_cloud_add_noise(const mtpcr_cloud* cloud, double sigma,
                                             uint64_t seed, mtpcr_cloud** out);
MTPCR_API void mtpcr_cloud_free(mtpcr_cloud* cloud);

/* ---- problems ---- */

/* Cuts three overlapping views from base; overlaps are for pairs (1,2),
 * (2,3), (3,1). full_range != 0 draws view rotations over [-pi, pi]. */
MTPCR_API mtpcr_status mtpcr_problem_generate(const mtpcr_cloud* base,
                                              const double overlaps[3], double sigma,
                                              uint64_t seed, int full_range,
                                              mtpcr_problem** out);
/* Copies the three clouds; no ground truth. */
MTPCR_API mtpcr_status mtpcr_problem_from_clouds(const mtpcr_cloud* c1,
                                                 const mtpcr_cloud* c2,
                                                 const mtpcr_cloud* c3,
                                                 mtpcr_problem** out);
/* Reads view1..3.ply and manifest.txt written by mtpcr_problem_save. */
MTPCR_API mtpcr_status mtpcr_problem_load(const char* dir, mtpcr_problem** out);
/* Only generated or loaded synthetic problems can be saved. */
MTPCR_API mtpcr_status mtpcr_problem_save(const mtpcr_problem* problem, const char* dir);
/* Attaches T12, T23, T31 from a manifest file. */
MTPCR_API mtpcr_status mtpcr_problem_load_ground_truth(mtpcr_problem* problem,
                                                       const char* manifest);
/* Borrowed pointer, valid while the problem lives. index 0..2. */
MTPCR_API const mtpcr_cloud* mtpcr_problem_cloud(const mtpcr_problem* problem, int index);
MTPCR_API int mtpcr_problem_has_ground_truth(const mtpcr_problem* problem);
/* Row-major 4x4 of T12 (0), T23 (1) or T31 (2). */
MTPCR_API mtpcr_status mtpcr_problem_ground_truth(const mtpcr_problem* problem, int index,
                                                  double out[16]);
/* Overlaps measured at generation time (synthetic problems only). */
MTPCR_API mtpcr_status mtpcr_problem_overlaps(const mtpcr_problem* problem,
                                              double achieved[3]);
MTPCR_API void mtpcr_problem_free(mtpcr_problem* problem);

/* ---- registration ---- */

/* options may be NULL for defaults. */
MTPCR_API mtpcr_status mtpcr_register(const mtpcr_problem* problem,
                                      const mtpcr_options* options, mtpcr_report** out);
MTPCR_API mtpcr_status mtpcr_report_summary(const mtpcr_report* report,
                                            mtpcr_summary* out);
/* Row-major 4x4 of the estimated T12 (0), T23 (1) or T31 (2) in input frames. */
MTPCR_API mtpcr_status mtpcr_report_transform(const mtpcr_report* report, int index,
                                              double out[16]);
/* Best cost per task after every generation: rows * 6 values. */
MTPCR_API size_t mtpcr_report_trace_rows(const mtpcr_report* report);
MTPCR_API mtpcr_status mtpcr_report_trace(const mtpcr_report* report, double* out,
                                          size_t capacity_rows);
/* JSON text. If buf is too small, *needed receives the size including the
 * terminator and MTPCR_ERR_BUFFER_TOO_SMALL is returned. */
MTPCR_API mtpcr_status mtpcr_report_json(const mtpcr_report* report, char* buf,
                                         size_t capacity, size_t* needed);
/* report.json and convergence.csv. */
MTPCR_API mtpcr_status mtpcr_report_write(const mtpcr_report* report, const char* dir);
/* aligned_1..3.ply: every cloud mapped into the frame of cloud 1. */
MTPCR_API mtpcr_status mtpcr_report_write_aligned(const mtpcr_report* report,
                                                  const mtpcr_problem* problem,
                                                  const char* dir);
MTPCR_API void mtpcr_report_free(mtpcr_report* report);

#ifdef __cplusplus
}
#endif

#endif
