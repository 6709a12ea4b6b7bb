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

#include "fds/cli/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fds/binary_io.hpp"
#include "fds/error.hpp"

namespace fds::cli {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

const std::vector<std::string> kDatasetKeys = {"men", "simlex", "gs2011",
                                               "relpron"};

class Reader {
 public:
  explicit Reader(const KeyValueConfig& settings) : settings_(settings) {}

  std::optional<std::string> raw(const std::string& key) const {
    return settings_.get(key);
  }

  void string(const std::string& key, std::filesystem::path& out) const {
    if (auto v = raw(key)) out = *v;
  }

  template <typename Int>
  void integer(const std::string& key, Int& out) const {
    if (auto v = raw(key)) {
      try {
        out = static_cast<Int>(io::parse_count(*v, key));
      } catch (const Error& e) {
        throw ConfigError(key + ": " + e.what());
      }
    }
  }

  void real(const std::string& key, double& out) const {
    if (auto v = raw(key)) {
      try {
        out = io::parse_real(*v, key);
      } catch (const Error& e) {
        throw ConfigError(key + ": " + e.what());
      }
    }
  }

  void boolean(const std::string& key, bool& out) const {
    if (auto v = raw(key)) {
      if (*v == "true" || *v == "1" || *v == "yes") out = true;
      else if (*v == "false" || *v == "0" || *v == "no") out = false;
      else throw ConfigError(key + ": expected true or false, got '" + *v + "'");
    }
  }

  template <typename Fn>
  void parsed(const std::string& key, Fn&& fn) const {
    if (auto v = raw(key)) {
      try {
        fn(*v);
      } catch (const Error& e) {
        throw ConfigError(key + ": " + e.what());
      }
    }
  }

 private:
  const KeyValueConfig& settings_;
};

std::string hash_lines(const std::vector<std::string>& lines) {
  std::string joined;
  for (const auto& l : lines) {
    joined += l;
    joined += '\n';
  }
  return hex64(fnv1a64(joined));
}

std::vector<std::string> prepare_lines(const ExperimentConfig& c) {
  return {"filter_mode=" + std::string(to_string(c.filter.mode)),
          "strict_threshold=" + std::to_string(c.filter.strict_threshold),
          "loose_threshold=" + std::to_string(c.filter.loose_threshold),
          std::string("filter_fixed_point=") +
              (c.filter.iterate_to_fixed_point ? "true" : "false")};
}

std::vector<std::string> pca_lines(const ExperimentConfig& c) {
  return {"pca_dim=" + std::to_string(c.pca_dim),
          "pca_scale=" + io::format_real(c.pca_scale)};
}

void append(std::vector<std::string>& to, const std::vector<std::string>& from) {
  to.insert(to.end(), from.begin(), from.end());
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text,
                                     std::string_view origin) {
  KeyValueConfig config;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) +
                        ": expected key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    if (key.empty()) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) +
                        ": empty key");
    }
    if (config.values_.count(key) != 0) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) +
                        ": duplicate key '" + key + "'");
    }
    config.values_[key] = trim(std::string_view(body).substr(eq + 1));
  }
  return config;
}

KeyValueConfig KeyValueConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str(), path.string());
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

void KeyValueConfig::set_assignment(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("expected key=value, got '" + std::string(assignment) +
                      "'");
  }
  const std::string key = trim(assignment.substr(0, eq));
  if (key.empty()) throw ConfigError("empty key in '" + std::string(assignment) + "'");
  set(key, trim(assignment.substr(eq + 1)));
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k = {
        "out", "data_dir", "triples", "features", "filter_mode",
        "strict_threshold", "loose_threshold", "filter_fixed_point", "pca_dim",
        "pca_scale", "ci_constrained", "lexicon_l2", "lexicon_epochs",
        "lexicon_lr", "lexicon_lr_decay", "lexicon_lr_step_epochs",
        "lexicon_alpha", "lexicon_batch_size", "lexicon_bias", "beta",
        "infer_epochs", "infer_lr", "infer_lr_decay", "infer_lr_step_epochs",
        "infer_init_jitter", "normalizer_bound", "noun_node", "seeds", "jobs",
        "bootstrap_samples"};
    k.insert(k.end(), kDatasetKeys.begin(), kDatasetKeys.end());
    return k;
  }();
  return keys;
}

std::filesystem::path ExperimentConfig::input(
    const std::filesystem::path& p) const {
  if (p.empty() || p.is_absolute() || data_dir.empty()) return p;
  return data_dir / p;
}

std::string ExperimentConfig::prepare_hash() const {
  return hash_lines(prepare_lines(*this));
}

std::string ExperimentConfig::pca_hash() const {
  return hash_lines(pca_lines(*this));
}

std::string ExperimentConfig::world_hash() const {
  auto lines = prepare_lines(*this);
  append(lines, pca_lines(*this));
  lines.push_back(std::string("ci_constrained=") +
                  (ci_constrained ? "true" : "false"));
  return hash_lines(lines);
}

std::string ExperimentConfig::lexicon_hash() const {
  auto lines = prepare_lines(*this);
  append(lines, pca_lines(*this));
  const auto& l = lexicon;
  append(lines, {"lexicon_l2=" + io::format_real(l.l2_weight),
                 "lexicon_epochs=" + std::to_string(l.epochs),
                 "lexicon_lr=" + io::format_real(l.lr),
                 "lexicon_lr_decay=" + io::format_real(l.lr_decay),
                 "lexicon_lr_step_epochs=" + std::to_string(l.lr_step_epochs),
                 "lexicon_alpha=" + io::format_real(l.alpha),
                 "lexicon_batch_size=" + std::to_string(l.batch_size),
                 std::string("lexicon_bias=") +
                     (l.append_bias ? "true" : "false")});
  return hash_lines(lines);
}

void ExperimentConfig::validate() const {
  filter.validate();
  lexicon.validate();
  inference.validate();
  if (pca_dim <= 0) throw ConfigError("pca_dim must be positive");
  if (!(pca_scale > 0.0)) throw ConfigError("pca_scale must be positive");
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
  if (bootstrap_samples < 1) {
    throw ConfigError("bootstrap_samples must be positive");
  }
}

ExperimentConfig make_experiment_config(const KeyValueConfig& settings) {
  const auto& keys = known_keys();
  for (const auto& [key, value] : settings.values()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  ExperimentConfig c;
  if (const char* env = std::getenv("FDS_DATA_DIR"); env != nullptr) {
    c.data_dir = env;
  }
  const Reader r(settings);
  r.string("out", c.out_dir);
  r.string("data_dir", c.data_dir);
  r.string("triples", c.triples);
  r.string("features", c.features);
  for (const auto& name : kDatasetKeys) {
    if (auto v = r.raw(name)) c.datasets[name] = *v;
  }

  r.parsed("filter_mode",
           [&](const std::string& v) { c.filter.mode = parse_filter_mode(v); });
  r.integer("strict_threshold", c.filter.strict_threshold);
  r.integer("loose_threshold", c.filter.loose_threshold);
  r.boolean("filter_fixed_point", c.filter.iterate_to_fixed_point);
  r.integer("pca_dim", c.pca_dim);
  r.real("pca_scale", c.pca_scale);
  r.boolean("ci_constrained", c.ci_constrained);

  r.real("lexicon_l2", c.lexicon.l2_weight);
  r.integer("lexicon_epochs", c.lexicon.epochs);
  r.real("lexicon_lr", c.lexicon.lr);
  r.real("lexicon_lr_decay", c.lexicon.lr_decay);
  r.integer("lexicon_lr_step_epochs", c.lexicon.lr_step_epochs);
  r.real("lexicon_alpha", c.lexicon.alpha);
  r.integer("lexicon_batch_size", c.lexicon.batch_size);
  r.boolean("lexicon_bias", c.lexicon.append_bias);

  r.real("beta", c.inference.beta);
  r.integer("infer_epochs", c.inference.epochs);
  r.real("infer_lr", c.inference.lr);
  r.real("infer_lr_decay", c.inference.lr_decay);
  r.integer("infer_lr_step_epochs", c.inference.lr_step_epochs);
  r.real("infer_init_jitter", c.inference.init_jitter);
  r.parsed("normalizer_bound", [&](const std::string& v) {
    c.inference.normalizer = parse_normalizer_bound(v);
  });
  r.parsed("noun_node",
           [&](const std::string& v) { c.noun_node = parse_node(v); });
  r.parsed("seeds", [&](const std::string& v) {
    c.seeds.clear();
    std::string item;
    std::istringstream in(v);
    while (std::getline(in, item, ',')) {
      const std::string t = trim(item);
      if (t.empty()) continue;
      c.seeds.push_back(static_cast<std::uint64_t>(io::parse_count(t, "seed")));
    }
  });
  r.integer("jobs", c.jobs);
  r.integer("bootstrap_samples", c.bootstrap_samples);
  c.validate();
  return c;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xF];
    value >>= 4;
  }
  return out;
}

}  // namespace fds::cli
