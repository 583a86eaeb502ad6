// Copyright 2026 The SSPF Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SSPF_ERRORS_HPP_
#define SSPF_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sspf {

/// Malformed input or parameters. Raised before any computation starts.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Inference broke down on valid input, e.g. every particle lost all posterior mass.
class ModelError : public std::runtime_error {
 public:
  ModelError(const std::string& what, std::size_t frame)
      : std::runtime_error(what + " (frame " + std::to_string(frame) + ")"), frame_{frame} {}

  [[nodiscard]] std::size_t frame() const noexcept { return frame_; }

 private:
  std::size_t frame_;
};

}  // namespace sspf

#endif  // SSPF_ERRORS_HPP_
