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

#ifndef FDS_EVALUATION_HPP_
#define FDS_EVALUATION_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fds/data_model.hpp"
#include "fds/feature_pipeline.hpp"
#include "fds/lexicon_model.hpp"
#include "fds/variational.hpp"
#include "fds/world_model.hpp"

namespace fds {

// ---------------------------------------------------------------------------
// Metrics

// Pearson correlation. Throws DataError on length mismatch, fewer than two
// items, or a constant input.
double pearson(std::span<const double> x, std::span<const double> y);

// Pearson correlation of midranks. Needs at least three items.
double spearman(std::span<const double> x, std::span<const double> y);

// Mean of precision@k over the relevant positions of one ranked list; 0 when
// nothing is relevant.
double average_precision(const std::vector<bool>& relevance_in_rank_order);
double mean_average_precision(const std::vector<std::vector<bool>>& rankings);

// Midrank of truths[target] when sorted descending: 1 + (# strictly greater)
// + (# equal - 1) / 2. Smaller means more similar.
double descending_midrank(std::span<const double> truths, std::size_t target);

// Scores every candidate with approx_truth at `node` and returns the
// descending midrank of `target`. Throws DataError if target is not a
// candidate.
double rank_of(PredicateId target, std::span<const PredicateId> candidates,
               const VariationalPosterior& q, Node node,
               const Lexicon& lexicon);

// ---------------------------------------------------------------------------
// Datasets

struct WordPairItem {
  std::string w1;
  std::string w2;
  double gold = 0.0;
};

struct TriplePairItem {
  std::string subject;
  std::string verb1;
  std::string object;
  std::string verb2;
  double gold = 0.0;
};

enum class ClauseType { kSubject, kObject };

struct RelpronProperty {
  std::string head_noun;
  std::string event;
  std::string other_noun;
  ClauseType clause = ClauseType::kSubject;
  bool relevant = false;
};

// One term with every candidate property; `relevant` marks the term's own.
struct RelpronItem {
  std::string term;
  std::vector<RelpronProperty> properties;
};

// MEN: `w1 w2 score` per line (lemma-form POS suffixes like `-n` dropped).
std::vector<WordPairItem> load_men(const std::filesystem::path& path);
// SimLex-999: tab-separated with a header naming word1, word2, SimLex999.
std::vector<WordPairItem> load_simlex(const std::filesystem::path& path);
// GS2011: whitespace-separated with a header naming subject, verb, object,
// landmark and input; one item per judgment record.
std::vector<TriplePairItem> load_gs2011(const std::filesystem::path& path);
// RELPRON: `SBJ term_N: head_N that verb_V obj_N` or
// `OBJ term_N: head_N that subj_N verb_V`.
std::vector<RelpronItem> load_relpron(const std::filesystem::path& path);

template <typename T>
struct FilteredDataset {
  std::vector<T> items;
  std::size_t total = 0;
  std::size_t kept() const { return items.size(); }
};

// Keeps items whose lemmas all resolve in `vocab`; strict mode also requires
// each lemma to be a NOUN predicate.
FilteredDataset<WordPairItem> filter_dataset(std::span<const WordPairItem> items,
                                             const Vocabulary& vocab,
                                             FilterMode mode);
FilteredDataset<TriplePairItem> filter_dataset(
    std::span<const TriplePairItem> items, const Vocabulary& vocab,
    FilterMode mode);
// Drops uncovered terms and properties, then terms left with no relevant
// property. `total` counts terms.
FilteredDataset<RelpronItem> filter_dataset(std::span<const RelpronItem> items,
                                            const Vocabulary& vocab,
                                            FilterMode mode);

// ---------------------------------------------------------------------------
// Protocols

struct EvalModels {
  const Lexicon& lexicon;
  const WorldModel& world;
};

struct EvalConfig {
  InferenceConfig inference;
  Node noun_node = Node::kX;  // node used for single-noun inference
  int jobs = 1;
};

struct EvalResult {
  double value = 0.0;
  std::vector<double> scores;  // per item; per term for RELPRON (its AP)
  std::vector<double> gold;    // empty for RELPRON
  std::size_t n_items = 0;
};

// Infer from {noun_node: w1}; score = -rank of w2 among the distinct second
// lemmas of the dataset. Value is Spearman against gold.
EvalResult eval_word_pairs(std::span<const WordPairItem> items,
                           const EvalModels& models, const EvalConfig& config);

// Scores the full dataset: covered items as in eval_word_pairs, uncovered
// items get the median covered score (mean of the middle two when even).
EvalResult eval_word_pairs_with_oov_median(std::span<const WordPairItem> items,
                                           FilterMode mode,
                                           const EvalModels& models,
                                           const EvalConfig& config);

// Infer from {X: subject, Y: verb1, Z: object}; score = -rank of verb2 at Y
// among the distinct verb2 lemmas. Spearman over all judgment records.
EvalResult eval_triple_pairs(std::span<const TriplePairItem> items,
                             const EvalModels& models, const EvalConfig& config);

// Infer each property's situation (subject clause: head at X; object clause:
// head at Z), score it by the term's approximate truth at the head node and
// rank properties per term. Value is MAP.
EvalResult eval_relpron(std::span<const RelpronItem> items,
                        const EvalModels& models, const EvalConfig& config);

// ---------------------------------------------------------------------------
// Image-retrieval baseline

// Mean pixie over every occurrence of `pred` (restricted to `node` if set).
// Throws DataError when the predicate never occurs.
Eigen::VectorXd retrieval_baseline(PredicateId pred,
                                   std::span<const LabeledTriple> triples,
                                   const FeatureFile& pixies,
                                   std::optional<Node> node = std::nullopt);

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Cosine of averaged pixies per pair, Spearman against gold.
EvalResult retrieval_word_pairs(std::span<const WordPairItem> items,
                                const Vocabulary& vocab,
                                std::span<const LabeledTriple> triples,
                                const FeatureFile& pixies);

// ---------------------------------------------------------------------------
// Significance

// Metric over per-item scores and gold; nullopt when undefined (e.g. a
// resample with a constant column).
using BootstrapMetric = std::function<std::optional<double>(
    std::span<const double> scores, std::span<const double> gold)>;

BootstrapMetric spearman_metric();
BootstrapMetric mean_metric();

// Two-tailed paired bootstrap. Resamples items with replacement and counts
// resampled differences d with |d - observed| >= |observed|; resamples where
// the metric is undefined are skipped. Throws DataError on length mismatch.
double bootstrap_test(std::span<const double> scores_a,
                      std::span<const double> scores_b,
                      std::span<const double> gold,
                      const BootstrapMetric& metric, int samples = 1000,
                      std::uint64_t seed = 0);

}  // namespace fds

#endif  // FDS_EVALUATION_HPP_
