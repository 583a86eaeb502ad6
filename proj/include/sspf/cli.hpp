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

#ifndef SSPF_CLI_HPP_
#define SSPF_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace sspf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitModel = 2;

/// Runs one `sspf` command line. `args` excludes the program name.
/// Returns 0 on success, 1 on invalid input or usage, 2 when inference breaks down.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sspf::cli

#endif  // SSPF_CLI_HPP_
