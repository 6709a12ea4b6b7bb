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

#ifndef FDS_LEXICON_MODEL_HPP_
#define FDS_LEXICON_MODEL_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fds/data_model.hpp"
#include "fds/feature_pipeline.hpp"

namespace fds {

// Semantic functions t_r(x) = sigmoid(v_r . x), one weight row per
// predicate. The optional bias is an ablation and is empty by default.
class Lexicon {
 public:
  // Throws DataError if the row count differs from the vocabulary size or a
  // weight is not finite.
  Lexicon(Vocabulary vocab, Eigen::MatrixXd weights,
          Eigen::VectorXd bias = Eigen::VectorXd());

  const Vocabulary& vocab() const { return vocab_; }
  Eigen::Index size() const { return weights_.rows(); }
  Eigen::Index dim() const { return weights_.cols(); }
  const Eigen::MatrixXd& weights() const { return weights_; }
  bool has_bias() const { return bias_.size() > 0; }
  const Eigen::VectorXd& bias_vector() const { return bias_; }
  double bias(PredicateId r) const;

  double pre_activation(PredicateId r, const Eigen::VectorXd& x) const;
  double truth(PredicateId r, const Eigen::VectorXd& x) const;
  double log_truth(PredicateId r, const Eigen::VectorXd& x) const;
  // t_r(x) / sum_i t_i(x).
  double generation_prob(PredicateId r, const Eigen::VectorXd& x) const;

  Eigen::VectorXd pre_activations(const Eigen::VectorXd& x) const;
  Eigen::VectorXd truths(const Eigen::VectorXd& x) const;
  Eigen::VectorXd generation_probs(const Eigen::VectorXd& x) const;

 private:
  void check(PredicateId r, const Eigen::VectorXd& x) const;

  Vocabulary vocab_;
  Eigen::MatrixXd weights_;
  Eigen::VectorXd bias_;
};

double truth(const Lexicon& lexicon, PredicateId r, const Eigen::VectorXd& x);
double generation_prob(const Lexicon& lexicon, PredicateId r,
                       const Eigen::VectorXd& x);

struct LexiconTrainConfig {
  double l2_weight = 5e-8;
  int epochs = 40;
  double lr = 0.01;
  double lr_decay = 0.4;
  int lr_step_epochs = 5;
  double alpha = 0.0;  // truth regularization weight; 0.5 in the variant
  int batch_size = 1024;
  std::uint64_t seed = 0;
  bool append_bias = false;

  // Throws ConfigError.
  void validate() const;
};

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;
  double lr = 0.0;
};

struct LexiconTrainResult {
  Lexicon lexicon;
  std::vector<EpochLog> log;
};

// One observed (pixie row, predicate) pair. Each labeled triple gives three.
struct PixieLabel {
  std::int64_t row = 0;
  PredicateId pred = 0;
};

std::vector<PixieLabel> training_pairs(std::span<const LabeledTriple> triples);

struct BatchLoss {
  double loss = 0.0;
  Eigen::MatrixXd grad_weights;
  Eigen::VectorXd grad_bias;  // empty without bias
};

// Loss of one mini-batch and its gradient:
//   -(1/B) sum_i [ log P(r_i | x_i) + alpha log t_{r_i}(x_i) ] + l2 ||W||^2
// where P(r|x) = t_r(x) / sum_j t_j(x) over the full vocabulary. Rows of
// `pixies` are the batch inputs.
BatchLoss lexicon_batch_loss(const Eigen::MatrixXd& weights,
                             const Eigen::VectorXd& bias,
                             const Eigen::MatrixXd& pixies,
                             std::span<const PredicateId> labels,
                             double alpha, double l2);

// Mini-batch Adam on lexicon_batch_loss with a step learning-rate schedule.
// Pairs are shuffled every epoch. Throws NumericalError on a non-finite loss.
LexiconTrainResult train_lexicon(std::span<const LabeledTriple> triples,
                                 const FeatureFile& pixies,
                                 const Vocabulary& vocab,
                                 const LexiconTrainConfig& config);

// Area under the ROC curve by the rank-sum formula, ties at midranks.
double auc_from_scores(std::span<const double> positives,
                       std::span<const double> negatives);

// Scores |positives| negatives drawn without replacement from `pool` and
// the positives with t_r. Rows are pixies. Throws DataError with fewer than
// two positives or a pool smaller than the positive set.
double auc_roc(const Lexicon& lexicon, PredicateId r,
               const Eigen::MatrixXd& positives, const Eigen::MatrixXd& pool,
               std::uint64_t seed);

struct PredicateAuc {
  PredicateId pred = 0;
  std::int64_t positives = 0;
  double auc = 0.0;
};

// auc_roc for every predicate with at least two annotated pixies; negatives
// come from pixies never annotated with that predicate.
std::vector<PredicateAuc> auc_report(const Lexicon& lexicon,
                                     std::span<const LabeledTriple> triples,
                                     const FeatureFile& pixies,
                                     std::uint64_t seed);

// Mean over rows of sum_r t_r(x).
double total_truth_audit(const Lexicon& lexicon, const Eigen::MatrixXd& pixies);

// Number of predicates with at least one annotated pixie whose truth reaches
// `threshold`.
std::int64_t predicates_reaching_truth(const Lexicon& lexicon,
                                       std::span<const LabeledTriple> triples,
                                       const FeatureFile& pixies,
                                       double threshold = 0.1);

// `fdsl v1 <|V|> <n>` (plus ` bias` when present), the vocabulary TSV block,
// then weights row-major as little-endian float64 and the optional bias.
void write_lexicon(const std::filesystem::path& path, const Lexicon& lexicon);
Lexicon read_lexicon(const std::filesystem::path& path);

// TSV: epoch, loss, lr.
void write_training_log(const std::filesystem::path& path,
                        std::span<const EpochLog> log);

}  // namespace fds

#endif  // FDS_LEXICON_MODEL_HPP_
