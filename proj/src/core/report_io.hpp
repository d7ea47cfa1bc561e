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

#include <filesystem>
#include <string>

#include "core/multitask.hpp"

namespace mtpcr {

/// Locale-independent decimal with 17 significant digits.
std::string format_number(double v);

/// report.json body: seed, configuration echoes, the three transforms
/// (row-major), final costs, loop residual and errors when known. Wall time
/// is deliberately excluded so equal seeds give byte-identical files.
std::string report_json(const RunReport& report);

/// convergence.csv body: generation, then the best cost of each task.
std::string convergence_csv(const RunReport& report);

/// Writes report.json and convergence.csv into `dir` (created if needed).
void write_report(const RunReport& report, const std::filesystem::path& dir);

/// Writes aligned_1.ply .. aligned_3.ply: every input cloud mapped into the
/// frame of cloud 1 using the reported transforms.
void write_aligned(const RunReport& report, const RegistrationProblem& problem,
                   const std::filesystem::path& dir);

void write_text(const std::filesystem::path& path, const std::string& body);

}  // namespace mtpcr
