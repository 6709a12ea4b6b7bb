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

#ifndef FDS_CLI_CONFIG_HPP_
#define FDS_CLI_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fds/data_model.hpp"
#include "fds/lexicon_model.hpp"
#include "fds/variational.hpp"

namespace fds::cli {

// Flat `key = value` settings. `#` starts a comment line.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text, std::string_view origin);
  static KeyValueConfig from_file(const std::filesystem::path& path);

  // Later calls win.
  void set(const std::string& key, const std::string& value);
  // Parses `key=value`.
  void set_assignment(std::string_view assignment);

  std::optional<std::string> get(const std::string& key) const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// Every key the experiment config understands; anything else is rejected.
const std::vector<std::string>& known_keys();

struct ExperimentConfig {
  std::filesystem::path out_dir = "out";
  std::filesystem::path data_dir;  // root for relative input paths
  std::filesystem::path triples;   // raw triple file
  std::filesystem::path features;  // raw fdsf feature file
  std::map<std::string, std::filesystem::path> datasets;

  FilterPolicy filter;
  std::int64_t pca_dim = 100;
  double pca_scale = 1.15;
  bool ci_constrained = true;
  LexiconTrainConfig lexicon;
  InferenceConfig inference;
  Node noun_node = Node::kX;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  int jobs = 1;
  int bootstrap_samples = 1000;

  // Resolves a relative input path against data_dir.
  std::filesystem::path input(const std::filesystem::path& p) const;

  // Hex FNV-1a hashes of the settings each artifact depends on.
  std::string prepare_hash() const;
  std::string pca_hash() const;
  std::string world_hash() const;
  std::string lexicon_hash() const;

  // Throws ConfigError.
  void validate() const;
};

// Builds a config from settings; `data_dir` defaults to $FDS_DATA_DIR.
// Throws ConfigError on unknown keys or unparsable values.
ExperimentConfig make_experiment_config(const KeyValueConfig& settings);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

}  // namespace fds::cli

#endif  // FDS_CLI_CONFIG_HPP_
