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

#include "core/error.hpp"

namespace mtpcr {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::DegeneratePose: return "degenerate pose";
    case ErrorCode::FileNotFound: return "file not found";
    case ErrorCode::MalformedHeader: return "malformed header";
    case ErrorCode::NonFiniteCoordinate: return "non-finite coordinate";
    case ErrorCode::EmptyCloud: return "empty cloud";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::Config: return "configuration error";
    case ErrorCode::Generation: return "generation error";
  }
  return "unknown error";
}

}  // namespace mtpcr
