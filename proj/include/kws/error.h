// include/kws/error.h

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

#ifndef KWS_ERROR_H_
#define KWS_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace kws {

enum class ErrorKind {
  kInvalidArgument,
  kUnsupportedFormat,
  kIo,
  kDimensionMismatch,
  kNumerical,
  kMissingArtifact,
  kInfeasible,
};

std::string_view ErrorKindName(ErrorKind kind);

/// All library failures are reported through this exception type; `kind()`
/// is what the CLI serializes into its machine-readable error record.
class KwsError : public std::runtime_error {
 public:
  KwsError(ErrorKind kind, const std::string &message) : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string &message) {
  throw KwsError(kind, message);
}

inline void Require(bool condition, ErrorKind kind, const std::string &message) {
  if (!condition) Fail(kind, message);
}

}  // namespace kws

#endif  // KWS_ERROR_H_
