// Copyright 2026 The retmsep Authors
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

#ifndef RETMSEP_PARALLEL_HPP_
#define RETMSEP_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace retmsep {

// Worker count: RETMSEP_WORKERS env var when set, hardware concurrency else.
int worker_count();

// Runs fn(i) for i in [0, n). Items must be independent; results must not
// depend on execution order (each i owns its outputs), which keeps parallel
// runs bit-identical to sequential ones. Exceptions are rethrown in the
// calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace retmsep

#endif  // RETMSEP_PARALLEL_HPP_
