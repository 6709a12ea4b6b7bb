/*
 * Copyright 2026 The fds Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FDS_RANKING_HPP_
#define FDS_RANKING_HPP_

#include <span>
#include <vector>

namespace fds {

// 1-based ascending ranks; tied values share the mean of their positions.
std::vector<double> midranks(std::span<const double> values);

}  // namespace fds

#endif  // FDS_RANKING_HPP_
