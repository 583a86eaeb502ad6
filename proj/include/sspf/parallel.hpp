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

#ifndef SSPF_PARALLEL_HPP_
#define SSPF_PARALLEL_HPP_

namespace sspf {

/// Worker count used by the filter and smoother loops.
/**
 * Read once from the SSPF_NUM_THREADS environment variable; defaults to the
 * available hardware parallelism. Results never depend on this value.
 */
int thread_count();

/// Overrides the worker count for the current process (values < 1 restore the default).
void set_thread_count(int threads);

}  // namespace sspf

#endif  // SSPF_PARALLEL_HPP_
