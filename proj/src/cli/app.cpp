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

#include "fds/cli/app.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "fds/binary_io.hpp"
#include "fds/cli/config.hpp"
#include "fds/cli/manifest.hpp"
#include "fds/error.hpp"
#include "fds/evaluation.hpp"
#include "fds/feature_pipeline.hpp"
#include "fds/lexicon_model.hpp"
#include "fds/variational.hpp"
#include "fds/version.hpp"
#include "fds/world_model.hpp"

namespace fds::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Flags {
  std::string config_file;
  std::vector<std::string> sets;
  std::string out;
  int jobs = 0;
  bool force = false;

  std::string triples;
  std::string features;
  double beta = 0.0;
  std::string seeds;
  std::uint64_t seed = 0;
  std::string x, y, z;
  int topk = 5;
  std::string dataset;
  std::string dataset_path;
  std::string baseline;
  bool oov_median = false;
};

struct Paths {
  fs::path vocab, triples, pca, pixies, world;
  fs::path lexicon(std::uint64_t seed) const {
    return root / ("lexicon-s" + std::to_string(seed) + ".fdsl");
  }
  fs::path root;
};

Paths paths_for(const ExperimentConfig& c) {
  Paths p;
  p.root = c.out_dir;
  p.vocab = p.root / "vocab.tsv";
  p.triples = p.root / "triples.tsv";
  p.pca = p.root / "pca.fdsp";
  p.pixies = p.root / "pixies.fdsf";
  p.world = p.root / "world.fdsw";
  return p;
}

void check_hash(const fs::path& artifact, const std::string& expected,
                bool force) {
  const auto m = read_manifest(artifact);
  if (m.config_hash == expected) return;
  const std::string msg = artifact.string() + " was built with config hash " +
                          m.config_hash + ", current config gives " + expected;
  if (!force) throw ConfigError(msg + " (use --force to override)");
  spdlog::warn("{}; continuing because of --force", msg);
}

struct Corpus {
  Vocabulary vocab;
  std::vector<LabeledTriple> triples;
  FeatureFile pixies;
};

Corpus load_corpus(const ExperimentConfig& c, const Paths& p, bool force) {
  check_hash(p.vocab, c.prepare_hash(), force);
  check_hash(p.pixies, c.pca_hash(), force);
  Corpus corpus;
  corpus.vocab = read_vocabulary(p.vocab);
  corpus.triples = load_triples(p.triples, corpus.vocab).triples;
  corpus.pixies = read_features(p.pixies);
  for (const auto& t : corpus.triples) {
    for (Node n : kAllNodes) {
      if (t.row(n) >= corpus.pixies.count()) {
        throw DataError("triple row " + std::to_string(t.row(n)) +
                        " outside pixie file of " +
                        std::to_string(corpus.pixies.count()) + " rows");
      }
    }
  }
  return corpus;
}

WorldModel load_world(const ExperimentConfig& c, const Paths& p, bool force) {
  check_hash(p.world, c.world_hash(), force);
  return read_world_model(p.world);
}

Lexicon load_lexicon(const ExperimentConfig& c, const Paths& p,
                     std::uint64_t seed, bool force) {
  const auto path = p.lexicon(seed);
  check_hash(path, c.lexicon_hash(), force);
  const auto m = read_manifest(path);
  if (m.lineage.count("pixie_space") && m.lineage.at("pixie_space") != c.pca_hash()) {
    const std::string msg = path.string() + " was trained in another pixie space";
    if (!force) throw ConfigError(msg + " (use --force to override)");
    spdlog::warn("{}; continuing because of --force", msg);
  }
  return read_lexicon(path);
}

void emit(std::ostream& out, const fs::path& file, const json& j) {
  const std::string text = j.dump(2) + "\n";
  if (!file.empty()) write_text_atomic(file, text);
  out << text;
}

std::string beta_tag(double beta) { return io::format_real(beta); }

// ---------------------------------------------------------------------------

int cmd_prepare(const ExperimentConfig& c, std::ostream& out) {
  if (c.triples.empty()) throw ConfigError("triples path not set");
  const Paths p = paths_for(c);
  std::int64_t malformed = 0;
  const auto raw = read_raw_triples(c.input(c.triples), &malformed);
  const auto vocab = build_vocabulary(raw, c.filter);
  const auto kept = filter_triples(raw, vocab);
  if (kept.triples.empty()) throw DataError("no triple survives filtering");
  write_vocabulary(p.vocab, vocab);
  write_raw_triples(p.triples, to_raw(kept.triples, vocab));
  for (const auto& f : {p.vocab, p.triples}) {
    write_manifest(f, {.command = "prepare", .config_hash = c.prepare_hash()});
  }
  emit(out, {},
       {{"command", "prepare"},
        {"vocab_size", vocab.size()},
        {"triples_total", raw.size()},
        {"triples_kept", kept.triples.size()},
        {"rejected_unknown", kept.rejected_unknown},
        {"malformed", malformed},
        {"filter_mode", to_string(c.filter.mode)}});
  return kExitOk;
}

int cmd_fit_pca(const ExperimentConfig& c, std::ostream& out) {
  if (c.features.empty()) throw ConfigError("features path not set");
  const Paths p = paths_for(c);
  const fs::path input = c.input(c.features);
  const auto fit = fit_pca(stream_rows(input), c.pca_dim, c.pca_scale);
  write_pca(p.pca, fit.model);
  transform_file(fit.model, input, p.pixies);
  for (const auto& f : {p.pca, p.pixies}) {
    write_manifest(f, {.command = "fit-pca", .config_hash = c.pca_hash()});
  }
  emit(out, {},
       {{"command", "fit-pca"},
        {"input_dim", fit.model.input_dim()},
        {"output_dim", fit.model.output_dim()},
        {"samples", fit.sample_count},
        {"explained_variance_ratio", fit.explained_variance_ratio}});
  return kExitOk;
}

int cmd_train_world(const ExperimentConfig& c, const Flags& f,
                    std::ostream& out) {
  const Paths p = paths_for(c);
  const auto corpus = load_corpus(c, p, f.force);
  WorldFitOptions options;
  options.ci_constrained = c.ci_constrained;
  const auto world =
      fit_world_model(stream_situations(corpus.triples, corpus.pixies), options);
  write_world_model(p.world, world);
  write_manifest(p.world, {.command = "train-world",
                           .config_hash = c.world_hash(),
                           .lineage = {{"vocab", c.prepare_hash()},
                                       {"pixie_space", c.pca_hash()}}});
  emit(out, {},
       {{"command", "train-world"},
        {"n", world.n()},
        {"situations", corpus.triples.size()},
        {"ci_constrained", world.ci_constrained()},
        {"log_det_sigma", world.log_det_sigma()}});
  return kExitOk;
}

int cmd_train_lexicon(const ExperimentConfig& c, const Flags& f,
                      std::ostream& out) {
  const Paths p = paths_for(c);
  const auto corpus = load_corpus(c, p, f.force);
  json runs = json::array();
  for (std::uint64_t seed : c.seeds) {
    LexiconTrainConfig config = c.lexicon;
    config.seed = seed;
    const auto result =
        train_lexicon(corpus.triples, corpus.pixies, corpus.vocab, config);
    const auto path = p.lexicon(seed);
    write_lexicon(path, result.lexicon);
    const fs::path log = p.root / ("lexicon-s" + std::to_string(seed) + ".log.tsv");
    write_training_log(log, result.log);
    write_manifest(path, {.command = "train-lexicon",
                          .config_hash = c.lexicon_hash(),
                          .seed = seed,
                          .lineage = {{"vocab", c.prepare_hash()},
                                      {"pixie_space", c.pca_hash()}}});
    runs.push_back({{"seed", seed},
                    {"final_loss", result.log.empty() ? 0.0 : result.log.back().loss}});
  }
  emit(out, {}, {{"command", "train-lexicon"}, {"runs", runs}});
  return kExitOk;
}

int cmd_diagnose(const ExperimentConfig& c, const Flags& f, std::ostream& out) {
  const Paths p = paths_for(c);
  const auto corpus = load_corpus(c, p, f.force);
  const auto world = load_world(c, p, f.force);
  const auto diag =
      fit_diagnostics(world, stream_situations(corpus.triples, corpus.pixies));
  write_diagnostics(p.root / "world-diagnostics.tsv", diag);
  json runs = json::array();
  for (std::uint64_t seed : c.seeds) {
    const auto lexicon = load_lexicon(c, p, seed, f.force);
    const auto report = auc_report(lexicon, corpus.triples, corpus.pixies, seed);
    std::string tsv = "lemma\tpositives\tauc\n";
    double sum = 0.0;
    for (const auto& r : report) {
      tsv += lexicon.vocab()[r.pred].lemma + "\t" + std::to_string(r.positives) +
             "\t" + io::format_real(r.auc) + "\n";
      sum += r.auc;
    }
    write_text_atomic(p.root / ("auc-s" + std::to_string(seed) + ".tsv"), tsv);
    runs.push_back({{"seed", seed},
                    {"predicates", report.size()},
                    {"mean_auc", report.empty() ? 0.0 : sum / report.size()}});
  }
  emit(out, p.root / "diagnose.json",
       {{"command", "diagnose"},
        {"mean_missing_area", diag.mean_missing_area},
        {"var_missing_area", diag.var_missing_area},
        {"auc", runs}});
  return kExitOk;
}

int cmd_infer(const ExperimentConfig& c, const Flags& f, std::ostream& out) {
  const Paths p = paths_for(c);
  const std::uint64_t seed = c.seeds.front();
  const auto world = load_world(c, p, f.force);
  const auto lexicon = load_lexicon(c, p, seed, f.force);
  ObservationPattern pattern;
  json observed = json::object();
  const std::array<const std::string*, 3> lemmas = {&f.x, &f.y, &f.z};
  for (Node n : kAllNodes) {
    const auto& lemma = *lemmas[static_cast<std::size_t>(index(n))];
    if (lemma.empty()) continue;
    const auto norm = normalize_lemma(lemma);
    pattern.set(n, lexicon.vocab().id_of(norm));
    observed[to_string(n)] = norm;
  }
  if (pattern.count() == 0) {
    throw ConfigError("infer needs at least one of --x, --y, --z");
  }
  InferenceConfig config = c.inference;
  config.seed = seed;
  const auto result = infer_posterior(pattern, lexicon, world, config);
  json nodes = json::object();
  for (Node n : kAllNodes) {
    const Eigen::VectorXd mean = result.posterior.node_mean(n);
    const Eigen::VectorXd var = result.posterior.node_var(n);
    json node{{"mean", std::vector<double>(mean.data(), mean.data() + mean.size())},
              {"var", std::vector<double>(var.data(), var.data() + var.size())}};
    if (f.topk > 0) {
      const Eigen::VectorXd truths = approx_truths(result.posterior, n, lexicon);
      std::vector<PredicateId> order(static_cast<std::size_t>(truths.size()));
      std::iota(order.begin(), order.end(), 0);
      const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(f.topk),
                                                  order.size());
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k),
                        order.end(), [&](PredicateId a, PredicateId b) {
                          return truths(a) > truths(b) ||
                                 (truths(a) == truths(b) && a < b);
                        });
      json top = json::array();
      for (std::size_t i = 0; i < k; ++i) {
        top.push_back({{"lemma", lexicon.vocab()[order[i]].lemma},
                       {"truth", truths(order[i])}});
      }
      node["top"] = top;
    }
    nodes[to_string(n)] = node;
  }
  emit(out, p.root / "infer.json",
       {{"command", "infer"},
        {"pattern", observed},
        {"beta", config.beta},
        {"seed", seed},
        {"elbo", result.elbo},
        {"nodes", nodes}});
  return kExitOk;
}

fs::path dataset_path(const ExperimentConfig& c, const Flags& f) {
  if (!f.dataset_path.empty()) return c.input(f.dataset_path);
  const auto it = c.datasets.find(f.dataset);
  if (it == c.datasets.end()) {
    throw ConfigError("no path for dataset '" + f.dataset +
                      "'; set it in the config or pass --dataset-path");
  }
  return c.input(it->second);
}

json seed_field(const std::vector<std::uint64_t>& seeds) {
  if (seeds.size() == 1) return seeds.front();
  return seeds;
}

int cmd_evaluate(const ExperimentConfig& c, const Flags& f, std::ostream& out) {
  static const std::set<std::string> kDatasets = {"men", "simlex", "gs2011",
                                                  "relpron"};
  if (kDatasets.count(f.dataset) == 0) {
    throw ConfigError("unknown dataset '" + f.dataset +
                      "'; expected men, simlex, gs2011 or relpron");
  }
  const bool word_pairs = f.dataset == "men" || f.dataset == "simlex";
  if (!f.baseline.empty() && f.baseline != "retrieval") {
    throw ConfigError("unknown baseline '" + f.baseline + "'");
  }
  if (!f.baseline.empty() && !word_pairs) {
    throw ConfigError("the retrieval baseline applies to word-pair datasets");
  }
  if (f.oov_median && !word_pairs) {
    throw ConfigError("--oov-median applies to word-pair datasets");
  }
  if (f.oov_median && !f.baseline.empty()) {
    throw ConfigError("--oov-median cannot be combined with --baseline");
  }

  const Paths p = paths_for(c);
  check_hash(p.pca, c.pca_hash(), f.force);
  const auto world = load_world(c, p, f.force);
  std::vector<Lexicon> lexicons;
  for (std::uint64_t seed : c.seeds) {
    lexicons.push_back(load_lexicon(c, p, seed, f.force));
  }
  const Vocabulary& vocab = lexicons.front().vocab();
  const fs::path path = dataset_path(c, f);

  std::vector<WordPairItem> pairs_all, pairs;
  std::vector<TriplePairItem> triples;
  std::vector<RelpronItem> relpron;
  std::size_t total = 0, kept = 0;
  if (word_pairs) {
    pairs_all = f.dataset == "men" ? load_men(path) : load_simlex(path);
    auto filtered = filter_dataset(std::span<const WordPairItem>(pairs_all),
                                   vocab, c.filter.mode);
    pairs = std::move(filtered.items);
    total = filtered.total;
    kept = pairs.size();
  } else if (f.dataset == "gs2011") {
    const auto items = load_gs2011(path);
    auto filtered = filter_dataset(std::span<const TriplePairItem>(items), vocab,
                                   c.filter.mode);
    triples = std::move(filtered.items);
    total = filtered.total;
    kept = triples.size();
  } else {
    const auto items = load_relpron(path);
    auto filtered = filter_dataset(std::span<const RelpronItem>(items), vocab,
                                   c.filter.mode);
    relpron = std::move(filtered.items);
    total = filtered.total;
    kept = relpron.size();
  }
  if (kept == 0) {
    throw DataError("no " + f.dataset + " item is covered by the vocabulary in " +
                    std::string(to_string(c.filter.mode)) + " mode");
  }
  spdlog::info("{}: {} of {} items covered", f.dataset, kept, total);

  const std::string metric = f.dataset == "relpron" ? "map" : "spearman";
  json runs = json::array();
  double sum = 0.0;
  std::size_t n_items = 0;
  EvalResult first;
  for (std::size_t s = 0; s < c.seeds.size(); ++s) {
    EvalConfig config;
    config.inference = c.inference;
    config.inference.seed = c.seeds[s];
    config.noun_node = c.noun_node;
    config.jobs = c.jobs;
    const EvalModels models{lexicons[s], world};
    EvalResult r;
    if (word_pairs && f.oov_median) {
      r = eval_word_pairs_with_oov_median(pairs_all, c.filter.mode, models, config);
    } else if (word_pairs) {
      r = eval_word_pairs(pairs, models, config);
    } else if (f.dataset == "gs2011") {
      r = eval_triple_pairs(triples, models, config);
    } else {
      r = eval_relpron(relpron, models, config);
    }
    sum += r.value;
    n_items = r.n_items;
    runs.push_back({{"dataset", f.dataset},
                    {"filter_mode", to_string(c.filter.mode)},
                    {"beta", c.inference.beta},
                    {"metric", metric},
                    {"value", r.value},
                    {"n_items", r.n_items},
                    {"seed", c.seeds[s]}});
    if (s == 0) first = std::move(r);
  }

  json result{{"dataset", f.dataset},
              {"filter_mode", to_string(c.filter.mode)},
              {"beta", c.inference.beta},
              {"metric", metric},
              {"value", sum / static_cast<double>(c.seeds.size())},
              {"n_items", n_items},
              {"seed", seed_field(c.seeds)},
              {"coverage", {{"kept", kept}, {"total", total}}},
              {"oov_median", f.oov_median},
              {"runs", runs}};

  if (!f.baseline.empty()) {
    const auto corpus = load_corpus(c, p, f.force);
    const auto base = retrieval_word_pairs(pairs, corpus.vocab, corpus.triples,
                                           corpus.pixies);
    const double pvalue =
        bootstrap_test(first.scores, base.scores, first.gold, spearman_metric(),
                       c.bootstrap_samples, c.seeds.front());
    result["bootstrap"] = {{"baseline", f.baseline},
                           {"baseline_value", base.value},
                           {"model_seed", c.seeds.front()},
                           {"samples", c.bootstrap_samples},
                           {"p_value", pvalue}};
  }
  const fs::path file =
      p.root / ("eval-" + f.dataset + "-" + to_string(c.filter.mode) + "-beta" +
                beta_tag(c.inference.beta) + ".json");
  emit(out, file, result);
  return kExitOk;
}

int cmd_audit_truth(const ExperimentConfig& c, const Flags& f,
                    std::ostream& out) {
  const Paths p = paths_for(c);
  const auto corpus = load_corpus(c, p, f.force);
  std::set<std::int64_t> rows;
  for (const auto& t : corpus.triples) {
    for (Node n : kAllNodes) rows.insert(t.row(n));
  }
  Eigen::MatrixXd pixies(static_cast<Eigen::Index>(rows.size()),
                         corpus.pixies.dim());
  Eigen::Index i = 0;
  for (std::int64_t r : rows) pixies.row(i++) = corpus.pixies.row(r).transpose();
  json runs = json::array();
  double sum = 0.0;
  for (std::uint64_t seed : c.seeds) {
    const auto lexicon = load_lexicon(c, p, seed, f.force);
    const double total = total_truth_audit(lexicon, pixies);
    sum += total;
    runs.push_back({{"seed", seed},
                    {"mean_total_truth", total},
                    {"predicates_reaching_0.1",
                     predicates_reaching_truth(lexicon, corpus.triples,
                                               corpus.pixies, 0.1)},
                    {"vocab_size", lexicon.size()}});
  }
  emit(out, p.root / "audit-truth.json",
       {{"command", "audit-truth"},
        {"pixies", rows.size()},
        {"mean_total_truth", sum / static_cast<double>(c.seeds.size())},
        {"runs", runs}});
  return kExitOk;
}

void use_stderr_logger() {
  if (spdlog::get("fds") == nullptr) {
    auto logger = spdlog::stderr_color_mt("fds");
    spdlog::set_default_logger(logger);
  }
}

int report(std::ostream& err, const std::string& kind, const std::string& msg,
           int code) {
  err << json{{"error", kind}, {"message", msg}, {"exit_code", code}}.dump()
      << "\n";
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  use_stderr_logger();
  CLI::App app{"Functional distributional semantics over visual pixies", "fds"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1, 1);
  Flags f;
  app.add_option("-c,--config", f.config_file, "Flat key = value config file");
  app.add_option("--set", f.sets, "Config override key=value (repeatable)");
  auto* out_opt = app.add_option("-o,--out", f.out, "Artifact directory");
  auto* jobs_opt = app.add_option("-j,--jobs", f.jobs, "Worker cap")
                       ->check(CLI::PositiveNumber);
  auto* seeds_opt =
      app.add_option("--seeds", f.seeds, "Comma-separated seed list");
  app.add_flag("--force", f.force, "Ignore config-hash mismatches");

  auto* prepare = app.add_subcommand("prepare", "Count predicates, filter triples");
  auto* triples_opt = prepare->add_option("--triples", f.triples, "Raw triple file");
  auto* fit_pca_cmd = app.add_subcommand("fit-pca", "Fit PCA and write pixies");
  auto* features_opt =
      fit_pca_cmd->add_option("--features", f.features, "Raw fdsf feature file");
  auto* train_world = app.add_subcommand("train-world", "Fit the world model");
  auto* train_lexicon = app.add_subcommand("train-lexicon", "Train one lexicon per seed");
  auto* diagnose = app.add_subcommand("diagnose", "Gaussian-fit and AUC reports");
  auto* infer = app.add_subcommand("infer", "Infer a situation from predicates");
  infer->add_option("--x", f.x, "Predicate at X (ARG1)");
  infer->add_option("--y", f.y, "Predicate at Y (event)");
  infer->add_option("--z", f.z, "Predicate at Z (ARG2)");
  infer->add_option("--topk", f.topk, "Top truths per node")->check(CLI::NonNegativeNumber);
  infer->add_option("--seed", f.seed, "Lexicon seed");
  auto* infer_beta = infer->add_option("--beta", f.beta, "KL weight");
  auto* evaluate = app.add_subcommand("evaluate", "Score a similarity benchmark");
  evaluate->add_option("--dataset", f.dataset, "men, simlex, gs2011 or relpron")
      ->required();
  evaluate->add_option("--dataset-path", f.dataset_path, "Dataset file");
  auto* eval_beta = evaluate->add_option("--beta", f.beta, "KL weight");
  evaluate->add_option("--baseline", f.baseline, "Paired bootstrap against 'retrieval'");
  evaluate->add_flag("--oov-median", f.oov_median,
                     "Score uncovered pairs with the median covered score");
  auto* audit = app.add_subcommand("audit-truth", "Mean total truth over pixies");
  (void)audit;

  try {
    std::vector<std::string> argv_store = {"fds"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return report(err, "config", e.what(), kExitConfig);
  }

  try {
    KeyValueConfig settings;
    if (!f.config_file.empty()) settings = KeyValueConfig::from_file(f.config_file);
    for (const auto& s : f.sets) settings.set_assignment(s);
    if (out_opt->count()) settings.set("out", f.out);
    if (jobs_opt->count()) settings.set("jobs", std::to_string(f.jobs));
    if (seeds_opt->count()) settings.set("seeds", f.seeds);
    if (triples_opt->count()) settings.set("triples", f.triples);
    if (features_opt->count()) settings.set("features", f.features);
    if (infer_beta->count() || eval_beta->count()) {
      settings.set("beta", io::format_real(f.beta));
    }
    if (infer->parsed() && infer->get_option("--seed")->count()) {
      settings.set("seeds", std::to_string(f.seed));
    }
    const ExperimentConfig config = make_experiment_config(settings);
    fs::create_directories(config.out_dir);

    if (prepare->parsed()) return cmd_prepare(config, out);
    if (fit_pca_cmd->parsed()) return cmd_fit_pca(config, out);
    if (train_world->parsed()) return cmd_train_world(config, f, out);
    if (train_lexicon->parsed()) return cmd_train_lexicon(config, f, out);
    if (diagnose->parsed()) return cmd_diagnose(config, f, out);
    if (infer->parsed()) return cmd_infer(config, f, out);
    if (evaluate->parsed()) return cmd_evaluate(config, f, out);
    return cmd_audit_truth(config, f, out);
  } catch (const Error& e) {
    const int code = e.kind() == ErrorKind::kConfig ? kExitConfig
                     : e.kind() == ErrorKind::kData ? kExitData
                                                    : kExitNumerical;
    return report(err, to_string(e.kind()), e.what(), code);
  } catch (const fs::filesystem_error& e) {
    return report(err, "data", e.what(), kExitData);
  }
}

}  // namespace fds::cli
