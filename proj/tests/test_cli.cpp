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

#include <fstream>
#include <sstream>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "fds/cli/app.hpp"
#include "fds/cli/config.hpp"
#include "fds/cli/manifest.hpp"
#include "fds/error.hpp"
#include "synthetic_world.hpp"
#include "temp_dir.hpp"

using namespace fds;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Invocation {
  int code = 0;
  std::string out;
  std::string err;

  json out_json() const { return json::parse(out); }
  json err_json() const { return json::parse(err); }
};

Invocation call(std::vector<std::string> args) {
  std::ostringstream out, err;
  Invocation inv;
  inv.code = cli::run(args, out, err);
  inv.out = out.str();
  inv.err = err.str();
  return inv;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// A temp workspace holding a small synthetic corpus and a config file.
struct Workspace {
  fds::testing::TempDir dir;
  fs::path config = dir / "run.cfg";
  fs::path out = dir / "out";

  Workspace() {
    fds::testing::SyntheticWorldOptions options;
    options.triples = 3000;
    const auto world = fds::testing::make_synthetic_world(options);
    write_raw_triples(dir / "triples.tsv", world.triples);
    write_features(dir / "features.fdsf", world.raw_features);
    std::ofstream men(dir / "men.txt");
    for (const auto& item : world.similarity_gold) {
      men << item.w1 << "-n " << item.w2 << "-n " << item.gold * 50 << "\n";
    }
    men << "dog-n unicorn-n 10\n";
    std::ofstream cfg(config);
    cfg << "# synthetic run\n"
        << "data_dir = " << dir.path().string() << "\n"
        << "triples = triples.tsv\n"
        << "features = features.fdsf\n"
        << "men = men.txt\n"
        << "pca_dim = 8\n"
        << "lexicon_epochs = 20\n"
        << "lexicon_batch_size = 256\n"
        << "infer_epochs = 200\n"
        << "seeds = 0\n"
        << "bootstrap_samples = 200\n";
  }

  Invocation fds(std::vector<std::string> args) const {
    std::vector<std::string> full{"-c", config.string(), "-o", out.string()};
    full.insert(full.end(), args.begin(), args.end());
    return call(full);
  }

  void build_through_lexicon() const {
    for (const char* cmd : {"prepare", "fit-pca", "train-world", "train-lexicon"}) {
      const auto r = fds({cmd});
      REQUIRE_MESSAGE(r.code == 0, cmd << ": " << r.err);
    }
  }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config parsing") {
  const auto kv = cli::KeyValueConfig::parse("# c\n a = 1 \n\nb=two\n", "t");
  CHECK(kv.get("a") == "1");
  CHECK(kv.get("b") == "two");
  CHECK_THROWS_AS(cli::KeyValueConfig::parse("a=1\na=2\n", "t"), ConfigError);
  CHECK_THROWS_AS(cli::KeyValueConfig::parse("novalue\n", "t"), ConfigError);
  cli::KeyValueConfig bad;
  bad.set("no_such_key", "1");
  CHECK_THROWS_AS(cli::make_experiment_config(bad), ConfigError);
  cli::KeyValueConfig ok;
  ok.set_assignment("seeds=3,1");
  ok.set_assignment("beta=0.5");
  const auto c = cli::make_experiment_config(ok);
  CHECK(c.seeds == std::vector<std::uint64_t>{3, 1});
  CHECK(c.inference.beta == 0.5);
}

TEST_CASE("stage hashes only depend on their own keys") {
  cli::KeyValueConfig a, b;
  b.set("beta", "2");
  const auto ca = cli::make_experiment_config(a), cb = cli::make_experiment_config(b);
  CHECK(ca.world_hash() == cb.world_hash());
  CHECK(ca.lexicon_hash() == cb.lexicon_hash());
  b.set("lexicon_l2", "0.1");
  CHECK(cli::make_experiment_config(b).lexicon_hash() != ca.lexicon_hash());
  CHECK(cli::make_experiment_config(b).world_hash() == ca.world_hash());
  CHECK(cli::fnv1a64("") == 0xcbf29ce484222325ULL);
}

TEST_CASE("full pipeline on a synthetic corpus") {
  Workspace ws;
  ws.build_through_lexicon();
  for (const char* name : {"vocab.tsv", "triples.tsv", "pca.fdsp", "pixies.fdsf",
                           "world.fdsw", "lexicon-s0.fdsl", "lexicon-s0.log.tsv"}) {
    CHECK_MESSAGE(fs::exists(ws.out / name), name);
  }
  const auto m = cli::read_manifest(ws.out / "lexicon-s0.fdsl");
  CHECK(m.command == "train-lexicon");
  CHECK(m.seed == 0u);
  CHECK(m.lineage.count("pixie_space") == 1);

  const auto inf = ws.fds({"infer", "--x", "dog", "--y", "chase", "--topk", "3"});
  REQUIRE_MESSAGE(inf.code == 0, inf.err);
  const auto j = inf.out_json();
  CHECK(j["pattern"]["X"] == "dog");
  CHECK(j["nodes"]["Y"]["top"].size() == 3);
  CHECK(j["nodes"]["X"]["mean"].size() == 8);
  CHECK(j["elbo"].get<double>() < 0.0);
  CHECK(fs::exists(ws.out / "infer.json"));

  const auto ev = ws.fds({"evaluate", "--dataset", "men", "--baseline", "retrieval"});
  REQUIRE_MESSAGE(ev.code == 0, ev.err);
  const auto e = ev.out_json();
  CHECK(e["dataset"] == "men");
  CHECK(e["metric"] == "spearman");
  CHECK(e["n_items"] == 20);
  CHECK(e["coverage"]["total"] == 21);
  CHECK(e["seed"] == 0);
  CHECK(e["value"].get<double>() > 0.5);
  CHECK(e["bootstrap"]["p_value"].get<double>() >= 0.0);
  CHECK(fs::exists(ws.out / "eval-men-strict-beta0.1.json"));

  const auto oov = ws.fds({"evaluate", "--dataset", "men", "--oov-median"});
  REQUIRE_MESSAGE(oov.code == 0, oov.err);
  CHECK(oov.out_json()["n_items"] == 21);

  const auto audit = ws.fds({"audit-truth"});
  REQUIRE_MESSAGE(audit.code == 0, audit.err);
  CHECK(audit.out_json()["mean_total_truth"].get<double>() > 0.0);

  const auto diag = ws.fds({"diagnose"});
  REQUIRE_MESSAGE(diag.code == 0, diag.err);
  CHECK(fs::exists(ws.out / "world-diagnostics.tsv"));
  CHECK(fs::exists(ws.out / "auc-s0.tsv"));
}

TEST_CASE("reruns are byte-identical") {
  Workspace ws;
  ws.build_through_lexicon();
  const auto world = slurp(ws.out / "world.fdsw");
  const auto lexicon = slurp(ws.out / "lexicon-s0.fdsl");
  const auto infer1 = ws.fds({"infer", "--x", "cat"}).out;
  REQUIRE(ws.fds({"train-world"}).code == 0);
  REQUIRE(ws.fds({"train-lexicon"}).code == 0);
  CHECK(slurp(ws.out / "world.fdsw") == world);
  CHECK(slurp(ws.out / "lexicon-s0.fdsl") == lexicon);
  CHECK(ws.fds({"infer", "--x", "cat"}).out == infer1);
}

TEST_CASE("config-hash mismatches are refused unless forced") {
  Workspace ws;
  ws.build_through_lexicon();
  const auto refused = ws.fds({"--set", "pca_dim=6", "train-world"});
  CHECK(refused.code == cli::kExitConfig);
  CHECK(refused.err_json()["error"] == "config");
  const auto lex = ws.fds({"--set", "lexicon_l2=0.5", "infer", "--x", "dog"});
  CHECK(lex.code == cli::kExitConfig);
  // Inference settings are not part of any artifact hash.
  CHECK(ws.fds({"--set", "beta=0.7", "infer", "--x", "dog"}).code == 0);
  CHECK(ws.fds({"--force", "--set", "lexicon_l2=0.5", "infer", "--x", "dog"}).code == 0);
}

TEST_CASE("exit codes and JSON errors") {
  Workspace ws;
  const auto no_cmd = call({});
  CHECK(no_cmd.code == cli::kExitConfig);
  CHECK(no_cmd.err_json()["exit_code"] == cli::kExitConfig);
  CHECK(call({"--set", "bogus=1", "-o", ws.out.string(), "prepare"}).code == cli::kExitConfig);
  CHECK(call({"-o", ws.out.string(), "prepare"}).code == cli::kExitConfig);

  const auto missing = ws.fds({"train-world"});
  CHECK(missing.code == cli::kExitData);
  CHECK(missing.err_json()["error"] == "data");

  std::ofstream(ws.dir / "garbage.tsv") << "not a triple file\n";
  CHECK(ws.fds({"--set", "triples=garbage.tsv", "prepare"}).code == cli::kExitData);

  REQUIRE(ws.fds({"prepare"}).code == 0);
  REQUIRE(ws.fds({"fit-pca"}).code == 0);
  REQUIRE(ws.fds({"train-world"}).code == 0);
  const auto bad_lr = ws.fds({"--set", "lexicon_lr=1e200", "train-lexicon"});
  CHECK(bad_lr.code == cli::kExitNumerical);
  CHECK(bad_lr.err_json()["error"] == "numerical");

  CHECK(ws.fds({"evaluate", "--dataset", "wordsim"}).code == cli::kExitConfig);
  CHECK(ws.fds({"infer"}).code != 0);
  CHECK(call({"--version"}).code == 0);
}

}  // TEST_SUITE
