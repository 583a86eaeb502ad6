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

#include "sspf/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>
#include <thread>

namespace sspf {

namespace {

int default_threads() {
  if (const char* env = std::getenv("SSPF_NUM_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) {
        return n;
      }
    } catch (const std::exception&) {
      // fall through to hardware default
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

int& override_threads() {
  static int value = 0;
  return value;
}

}  // namespace

int thread_count() {
  static const int from_env = default_threads();
  return override_threads() > 0 ? override_threads() : from_env;
}

void set_thread_count(int threads) { override_threads() = threads > 0 ? threads : 0; }

}  // namespace sspf
