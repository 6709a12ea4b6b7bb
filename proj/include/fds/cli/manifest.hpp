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

#ifndef FDS_CLI_MANIFEST_HPP_
#define FDS_CLI_MANIFEST_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace fds::cli {

// Provenance written next to every artifact as `<artifact>.manifest.json`.
struct Manifest {
  std::string artifact;
  std::string command;
  std::string config_hash;
  std::optional<std::uint64_t> seed;
  // Hashes of upstream artifacts, e.g. "pixie_space" -> PCA config hash.
  std::map<std::string, std::string> lineage;
  std::string version;
};

std::filesystem::path manifest_path(const std::filesystem::path& artifact);
void write_manifest(const std::filesystem::path& artifact, Manifest manifest);
// Throws DataError if the manifest is missing or malformed.
Manifest read_manifest(const std::filesystem::path& artifact);

// Writes `text` to `path` through a temp file and rename.
void write_text_atomic(const std::filesystem::path& path,
                       const std::string& text);

}  // namespace fds::cli

#endif  // FDS_CLI_MANIFEST_HPP_
