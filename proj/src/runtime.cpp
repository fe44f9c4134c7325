/*
 * Licensed under the Apache License, Version 2.0 (the "License"); you may not
 * use this file except in compliance with the License. You may obtain a copy
 * of the License at http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
 * WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
 * License for the specific language governing permissions and limitations
 * under the License.
 */
#include <lfslab/runtime.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <thread>

namespace lfslab {

unsigned worker_count() {
  unsigned requested = 0;
  if (const char* env = std::getenv("LFSLAB_THREADS")) {
    const char* end = env + std::strlen(env);
    auto [ptr, ec] = std::from_chars(env, end, requested);
    if (ec != std::errc() || ptr != end) requested = 0;
  }
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace lfslab
