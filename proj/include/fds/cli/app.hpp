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

#ifndef FDS_CLI_APP_HPP_
#define FDS_CLI_APP_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace fds::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumerical = 4;

// Runs one `fds` invocation. `args` excludes the program name. Results go to
// `out`; failures are reported on `err` as a JSON object and mapped to the
// exit codes above.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace fds::cli

#endif  // FDS_CLI_APP_HPP_
