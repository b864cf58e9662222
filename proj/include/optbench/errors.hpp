// Copyright 2026 The opt-bench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace optbench {

/// Raised when a caller violates a documented precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a NaN or infinity shows up in a computation.
///
/// `layer()` is the zero-based network layer where the value was first seen,
/// or -1 when the failure is not tied to a layer (e.g. a non-finite gradient
/// handed to an optimizer).
class NumericFailure : public std::runtime_error {
 public:
  explicit NumericFailure(const std::string& what, int layer = -1)
      : std::runtime_error(what), layer_(layer) {}

  [[nodiscard]] int layer() const noexcept { return layer_; }

 private:
  int layer_;
};

}  // namespace optbench
