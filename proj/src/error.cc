// src/error.cc

// Copyright 2026  The kwsaug Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "kws/error.h"

namespace kws {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
      return "invalid_argument";
    case ErrorKind::kUnsupportedFormat:
      return "unsupported_format";
    case ErrorKind::kIo:
      return "io";
    case ErrorKind::kDimensionMismatch:
      return "dimension_mismatch";
    case ErrorKind::kNumerical:
      return "numerical";
    case ErrorKind::kMissingArtifact:
      return "missing_artifact";
    case ErrorKind::kInfeasible:
      return "infeasible";
  }
  return "unknown";
}

}  // namespace kws
