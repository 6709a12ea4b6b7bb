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

#include "fds/lexicon_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "fds/adam.hpp"
#include "fds/binary_io.hpp"
#include "fds/error.hpp"
#include "fds/numeric.hpp"
#include "fds/ranking.hpp"

namespace fds {
namespace {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::MatrixXd gather_rows(const FeatureFile& pixies,
                            std::span<const std::int64_t> rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), pixies.dim());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) =
        pixies.rows.row(rows[i]).cast<double>();
  }
  return out;
}

}  // namespace

Lexicon::Lexicon(Vocabulary vocab, Eigen::MatrixXd weights, Eigen::VectorXd bias)
    : vocab_(std::move(vocab)),
      weights_(std::move(weights)),
      bias_(std::move(bias)) {
  if (static_cast<std::size_t>(weights_.rows()) != vocab_.size()) {
    throw DataError("lexicon has " + std::to_string(weights_.rows()) +
                    " weight rows for a vocabulary of " +
                    std::to_string(vocab_.size()));
  }
  if (bias_.size() != 0 && bias_.size() != weights_.rows()) {
    throw DataError("lexicon bias has the wrong length");
  }
  if (!weights_.allFinite() || !bias_.allFinite()) {
    throw DataError("lexicon weights are not finite");
  }
}

void Lexicon::check(PredicateId r, const Eigen::VectorXd& x) const {
  if (r < 0 || r >= size()) {
    throw DataError("unknown predicate id " + std::to_string(r));
  }
  if (x.size() != dim()) {
    throw DataError("pixie has dimension " + std::to_string(x.size()) +
                    ", lexicon expects " + std::to_string(dim()));
  }
}

double Lexicon::bias(PredicateId r) const {
  return has_bias() ? bias_[r] : 0.0;
}

double Lexicon::pre_activation(PredicateId r, const Eigen::VectorXd& x) const {
  check(r, x);
  return weights_.row(r).dot(x) + bias(r);
}

double Lexicon::truth(PredicateId r, const Eigen::VectorXd& x) const {
  return sigmoid(pre_activation(r, x));
}

double Lexicon::log_truth(PredicateId r, const Eigen::VectorXd& x) const {
  return log_sigmoid(pre_activation(r, x));
}

double Lexicon::generation_prob(PredicateId r, const Eigen::VectorXd& x) const {
  check(r, x);
  const Eigen::VectorXd t = truths(x);
  return t[r] / t.sum();
}

Eigen::VectorXd Lexicon::pre_activations(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) {
    throw DataError("pixie dimension does not match the lexicon");
  }
  Eigen::VectorXd z = weights_ * x;
  if (has_bias()) {
    z += bias_;
  }
  return z;
}

Eigen::VectorXd Lexicon::truths(const Eigen::VectorXd& x) const {
  return pre_activations(x).unaryExpr([](double z) { return sigmoid(z); });
}

Eigen::VectorXd Lexicon::generation_probs(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd t = truths(x);
  return t / t.sum();
}

double truth(const Lexicon& lexicon, PredicateId r, const Eigen::VectorXd& x) {
  return lexicon.truth(r, x);
}

double generation_prob(const Lexicon& lexicon, PredicateId r,
                       const Eigen::VectorXd& x) {
  return lexicon.generation_prob(r, x);
}

void LexiconTrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("lexicon lr must be > 0");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) {
    throw ConfigError("lexicon lr_decay must be in (0, 1]");
  }
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  if (!(l2_weight >= 0.0)) throw ConfigError("l2_weight must be >= 0");
  if (epochs < 1) throw ConfigError("lexicon epochs must be >= 1");
  if (lr_step_epochs < 1) throw ConfigError("lr_step_epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
}

std::vector<PixieLabel> training_pairs(std::span<const LabeledTriple> triples) {
  std::vector<PixieLabel> pairs;
  pairs.reserve(3 * triples.size());
  for (const auto& t : triples) {
    for (Node node : kAllNodes) {
      pairs.push_back({t.row(node), t.pred(node)});
    }
  }
  return pairs;
}

BatchLoss lexicon_batch_loss(const Eigen::MatrixXd& weights,
                             const Eigen::VectorXd& bias,
                             const Eigen::MatrixXd& pixies,
                             std::span<const PredicateId> labels, double alpha,
                             double l2) {
  const Eigen::Index batch = pixies.rows();
  if (batch == 0 || static_cast<std::size_t>(batch) != labels.size()) {
    throw DataError("batch pixies and labels disagree in size");
  }
  Eigen::MatrixXd z = pixies * weights.transpose();  // B x V
  if (bias.size() > 0) {
    z.rowwise() += bias.transpose();
  }
  // d(objective)/dz. For the normalizer term: -t_j (1 - t_j) / S.
  Eigen::MatrixXd g(z.rows(), z.cols());
  double objective = 0.0;
  for (Eigen::Index i = 0; i < batch; ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      const double t = sigmoid(z(i, j));
      s += t;
      g(i, j) = t * sigmoid(-z(i, j));
    }
    g.row(i) /= -s;
    const PredicateId r = labels[static_cast<std::size_t>(i)];
    const double zr = z(i, r);
    objective += (1.0 + alpha) * log_sigmoid(zr) - std::log(s);
    g(i, r) += (1.0 + alpha) * sigmoid(-zr);
  }
  const double inv_b = 1.0 / static_cast<double>(batch);
  BatchLoss out;
  out.loss = -objective * inv_b + l2 * weights.squaredNorm();
  out.grad_weights = -(g.transpose() * pixies) * inv_b + 2.0 * l2 * weights;
  if (bias.size() > 0) {
    out.grad_bias = -g.colwise().sum().transpose() * inv_b;
  }
  return out;
}

LexiconTrainResult train_lexicon(std::span<const LabeledTriple> triples,
                                 const FeatureFile& pixies,
                                 const Vocabulary& vocab,
                                 const LexiconTrainConfig& config) {
  config.validate();
  if (vocab.empty()) {
    throw DataError("cannot train a lexicon over an empty vocabulary");
  }
  std::vector<PixieLabel> pairs = training_pairs(triples);
  if (pairs.empty()) {
    throw DataError("no training pairs");
  }
  for (const auto& p : pairs) {
    if (p.row < 0 || p.row >= pixies.count()) {
      throw DataError("triple references pixie row " + std::to_string(p.row) +
                      " outside [0, " + std::to_string(pixies.count()) + ")");
    }
    if (p.pred < 0 || static_cast<std::size_t>(p.pred) >= vocab.size()) {
      throw DataError("triple references unknown predicate id");
    }
  }

  const Eigen::Index v = static_cast<Eigen::Index>(vocab.size());
  const Eigen::Index n = pixies.dim();
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> init(0.0, 1.0 / std::sqrt(static_cast<double>(n)));
  // Row-major so the parameter vector maps onto the matrix directly.
  RowMajorMatrix weights(v, n);
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    weights.data()[i] = init(rng);
  }
  Eigen::VectorXd bias = config.append_bias ? Eigen::VectorXd::Zero(v)
                                            : Eigen::VectorXd();

  Adam weight_opt(weights.size());
  Adam bias_opt(bias.size());
  const StepSchedule schedule{config.lr, config.lr_decay, config.lr_step_epochs};
  const std::size_t batch_size = static_cast<std::size_t>(config.batch_size);

  std::vector<EpochLog> log;
  std::vector<std::int64_t> rows;
  std::vector<PredicateId> labels;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = schedule.at(epoch);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    double weighted_loss = 0.0;
    int batch_index = 0;
    for (std::size_t start = 0; start < pairs.size(); start += batch_size) {
      const std::size_t end = std::min(pairs.size(), start + batch_size);
      rows.clear();
      labels.clear();
      for (std::size_t k = start; k < end; ++k) {
        rows.push_back(pairs[k].row);
        labels.push_back(pairs[k].pred);
      }
      const Eigen::MatrixXd x = gather_rows(pixies, rows);
      const BatchLoss bl = lexicon_batch_loss(weights, bias, x, labels,
                                              config.alpha, config.l2_weight);
      if (!std::isfinite(bl.loss) || !bl.grad_weights.allFinite()) {
        throw NumericalError("non-finite lexicon loss at epoch " +
                             std::to_string(epoch) + ", batch " +
                             std::to_string(batch_index) + " (pairs " +
                             std::to_string(start) + ".." +
                             std::to_string(end) + ")");
      }
      const RowMajorMatrix grad = bl.grad_weights;
      weight_opt.step(Eigen::Map<Eigen::VectorXd>(weights.data(), weights.size()),
                      Eigen::Map<const Eigen::VectorXd>(grad.data(), grad.size()),
                      lr);
      if (bias.size() > 0) {
        bias_opt.step(bias, bl.grad_bias, lr);
      }
      weighted_loss += bl.loss * static_cast<double>(end - start);
      ++batch_index;
    }
    const double epoch_loss = weighted_loss / static_cast<double>(pairs.size());
    log.push_back({epoch, epoch_loss, lr});
    spdlog::debug("lexicon epoch {} loss {:.6f} lr {:.3g}", epoch, epoch_loss, lr);
  }
  return {Lexicon(vocab, Eigen::MatrixXd(weights), std::move(bias)),
          std::move(log)};
}

double auc_from_scores(std::span<const double> positives,
                       std::span<const double> negatives) {
  if (positives.empty() || negatives.empty()) {
    throw DataError("AUC needs positive and negative scores");
  }
  std::vector<double> all(positives.begin(), positives.end());
  all.insert(all.end(), negatives.begin(), negatives.end());
  const std::vector<double> ranks = midranks(all);
  double pos_rank_sum = 0.0;
  for (std::size_t i = 0; i < positives.size(); ++i) {
    pos_rank_sum += ranks[i];
  }
  const double np = static_cast<double>(positives.size());
  const double nn = static_cast<double>(negatives.size());
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

double auc_roc(const Lexicon& lexicon, PredicateId r,
               const Eigen::MatrixXd& positives, const Eigen::MatrixXd& pool,
               std::uint64_t seed) {
  const Eigen::Index np = positives.rows();
  if (np < 2) {
    throw DataError("AUC needs at least two positives");
  }
  if (pool.rows() < np) {
    throw DataError("negative pool smaller than the positive set");
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(pool.rows()));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first np entries are a uniform sample.
  for (Eigen::Index i = 0; i < np; ++i) {
    std::uniform_int_distribution<Eigen::Index> pick(i, pool.rows() - 1);
    std::swap(order[static_cast<std::size_t>(i)],
              order[static_cast<std::size_t>(pick(rng))]);
  }
  std::vector<double> pos_scores(static_cast<std::size_t>(np));
  std::vector<double> neg_scores(static_cast<std::size_t>(np));
  for (Eigen::Index i = 0; i < np; ++i) {
    pos_scores[static_cast<std::size_t>(i)] =
        lexicon.truth(r, positives.row(i).transpose());
    neg_scores[static_cast<std::size_t>(i)] = lexicon.truth(
        r, pool.row(order[static_cast<std::size_t>(i)]).transpose());
  }
  return auc_from_scores(pos_scores, neg_scores);
}

std::vector<PredicateAuc> auc_report(const Lexicon& lexicon,
                                     std::span<const LabeledTriple> triples,
                                     const FeatureFile& pixies,
                                     std::uint64_t seed) {
  std::vector<std::vector<std::int64_t>> rows_by_pred(
      static_cast<std::size_t>(lexicon.size()));
  std::vector<std::int64_t> all_rows;
  for (const auto& p : training_pairs(triples)) {
    rows_by_pred[static_cast<std::size_t>(p.pred)].push_back(p.row);
    all_rows.push_back(p.row);
  }
  std::sort(all_rows.begin(), all_rows.end());
  all_rows.erase(std::unique(all_rows.begin(), all_rows.end()), all_rows.end());

  std::vector<PredicateAuc> out;
  for (PredicateId r = 0; r < lexicon.size(); ++r) {
    auto& pos_rows = rows_by_pred[static_cast<std::size_t>(r)];
    if (pos_rows.size() < 2) {
      continue;
    }
    const std::unordered_set<std::int64_t> positive_set(pos_rows.begin(),
                                                        pos_rows.end());
    std::vector<std::int64_t> neg_rows;
    for (std::int64_t row : all_rows) {
      if (!positive_set.count(row)) {
        neg_rows.push_back(row);
      }
    }
    if (neg_rows.size() < pos_rows.size()) {
      continue;
    }
    const double auc =
        auc_roc(lexicon, r, gather_rows(pixies, pos_rows),
                gather_rows(pixies, neg_rows), seed + static_cast<std::uint64_t>(r));
    out.push_back({r, static_cast<std::int64_t>(pos_rows.size()), auc});
  }
  return out;
}

double total_truth_audit(const Lexicon& lexicon, const Eigen::MatrixXd& pixies) {
  if (pixies.rows() == 0) {
    throw DataError("truth audit needs at least one pixie");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < pixies.rows(); ++i) {
    total += lexicon.truths(pixies.row(i).transpose()).sum();
  }
  return total / static_cast<double>(pixies.rows());
}

std::int64_t predicates_reaching_truth(const Lexicon& lexicon,
                                       std::span<const LabeledTriple> triples,
                                       const FeatureFile& pixies,
                                       double threshold) {
  std::vector<char> reached(static_cast<std::size_t>(lexicon.size()), 0);
  for (const auto& p : training_pairs(triples)) {
    if (!reached[static_cast<std::size_t>(p.pred)] &&
        lexicon.truth(p.pred, pixies.row(p.row)) >= threshold) {
      reached[static_cast<std::size_t>(p.pred)] = 1;
    }
  }
  return std::count(reached.begin(), reached.end(), 1);
}

void write_lexicon(const std::filesystem::path& path, const Lexicon& lexicon) {
  io::AtomicWriter writer(path);
  auto& out = writer.stream();
  out << "fdsl v1 " << lexicon.size() << ' ' << lexicon.dim()
      << (lexicon.has_bias() ? " bias" : "") << '\n';
  write_vocabulary(out, lexicon.vocab());
  const RowMajorMatrix w = lexicon.weights();
  io::write_values(out, std::span<const double>(w.data(), w.size()));
  if (lexicon.has_bias()) {
    io::write_values(out, std::span<const double>(lexicon.bias_vector().data(),
                                                  lexicon.bias_vector().size()));
  }
  writer.commit();
}

Lexicon read_lexicon(const std::filesystem::path& path) {
  std::ifstream in = io::open_input(path);
  const auto fields = io::read_header(in, "fdsl", "v1");
  if (fields.size() != 4 && !(fields.size() == 5 && fields[4] == "bias")) {
    throw DataError("fdsl header needs '<|V|> <n> [bias]'");
  }
  const auto v = io::parse_count(fields[2], "vocabulary size");
  const auto n = io::parse_count(fields[3], "pixie dimension");
  if (v <= 0 || n <= 0) {
    throw DataError("invalid fdsl header in " + path.string());
  }
  Vocabulary vocab = read_vocabulary(in, v);
  RowMajorMatrix w(v, n);
  io::read_values(in, std::span<double>(w.data(), w.size()), "lexicon weights");
  Eigen::VectorXd bias;
  if (fields.size() == 5) {
    bias.resize(v);
    io::read_values(in, std::span<double>(bias.data(), bias.size()),
                    "lexicon bias");
  }
  io::expect_end(in, "lexicon");
  return Lexicon(std::move(vocab), Eigen::MatrixXd(w), std::move(bias));
}

void write_training_log(const std::filesystem::path& path,
                        std::span<const EpochLog> log) {
  io::AtomicWriter writer(path, /*binary=*/false);
  auto& out = writer.stream();
  out << "epoch\tloss\tlr\n";
  for (const auto& e : log) {
    out << e.epoch << '\t' << io::format_real(e.loss) << '\t'
        << io::format_real(e.lr) << '\n';
  }
  writer.commit();
}

}  // namespace fds
