// Copyright 2026 The wiresec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wiresec {

enum class ErrorKind {
  kInvalidArgument,
  kInvalidNetwork,
  kInvalidCode,
  kCyclicNetwork,
  kBudgetExceeded,
  kUnreachableObservation,
  kRefused,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid argument";
    case ErrorKind::kInvalidNetwork: return "invalid network";
    case ErrorKind::kInvalidCode: return "invalid code";
    case ErrorKind::kCyclicNetwork: return "acyclic schedule required";
    case ErrorKind::kBudgetExceeded: return "budget exceeded";
    case ErrorKind::kUnreachableObservation: return "unreachable observation";
    case ErrorKind::kRefused: return "refused";
  }
  return "error";
}

// All library failures are reported through this type. what() is prefixed
// with the kind so diagnostics stay greppable from the CLI.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace wiresec
