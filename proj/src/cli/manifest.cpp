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

#include "fds/cli/manifest.hpp"

#include <fstream>
#include <sstream>

#include <Eigen/Core>
#include <json.hpp>

#include "fds/binary_io.hpp"
#include "fds/error.hpp"
#include "fds/version.hpp"

namespace fds::cli {

using nlohmann::json;

std::filesystem::path manifest_path(const std::filesystem::path& artifact) {
  return artifact.string() + ".manifest.json";
}

void write_text_atomic(const std::filesystem::path& path,
                       const std::string& text) {
  io::AtomicWriter writer(path, /*binary=*/false);
  writer.stream() << text;
  writer.commit();
}

void write_manifest(const std::filesystem::path& artifact, Manifest m) {
  if (m.artifact.empty()) m.artifact = artifact.filename().string();
  if (m.version.empty()) m.version = kVersion;
  json j;
  j["artifact"] = m.artifact;
  j["command"] = m.command;
  j["config_hash"] = m.config_hash;
  j["seed"] = m.seed ? json(*m.seed) : json(nullptr);
  j["lineage"] = m.lineage;
  j["versions"] = {{"fds", m.version},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                 std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)}};
  write_text_atomic(manifest_path(artifact), j.dump(2) + "\n");
}

Manifest read_manifest(const std::filesystem::path& artifact) {
  const auto path = manifest_path(artifact);
  std::ifstream in(path);
  if (!in) throw DataError("missing manifest " + path.string());
  try {
    const json j = json::parse(in);
    Manifest m;
    m.artifact = j.at("artifact").get<std::string>();
    m.command = j.at("command").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    if (!j.at("seed").is_null()) m.seed = j.at("seed").get<std::uint64_t>();
    m.lineage = j.at("lineage").get<std::map<std::string, std::string>>();
    m.version = j.at("versions").at("fds").get<std::string>();
    return m;
  } catch (const json::exception& e) {
    throw DataError("malformed manifest " + path.string() + ": " + e.what());
  }
}

}  // namespace fds::cli
