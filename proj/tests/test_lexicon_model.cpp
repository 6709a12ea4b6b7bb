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

#include <cmath>
#include <random>

#include <doctest.h>

#include "fds/error.hpp"
#include "fds/lexicon_model.hpp"
#include "oracles.hpp"
#include "synthetic_world.hpp"
#include "temp_dir.hpp"

using namespace fds;
using fds::testing::TempDir;

namespace {

Vocabulary names(int count) {
  std::vector<Predicate> p(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) p[static_cast<std::size_t>(i)].lemma = "p" + std::to_string(i);
  return Vocabulary(std::move(p));
}

double logit(double p) { return std::log(p / (1.0 - p)); }

// Two Gaussian clusters in n = 4; each triple is three pixies of one class.
struct TwoClassData {
  FeatureFile pixies;
  std::vector<LabeledTriple> triples;
};

TwoClassData two_class(int per_class, double sep, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  TwoClassData d;
  const int rows = 2 * 3 * per_class;
  d.pixies.rows.resize(rows, 4);
  int row = 0;
  for (int c = 0; c < 2; ++c) {
    for (int k = 0; k < per_class; ++k) {
      LabeledTriple t;
      t.image_id = "i";
      for (int j = 0; j < 3; ++j) {
        for (int dim = 0; dim < 4; ++dim) {
          const double center = dim == 0 ? (c == 0 ? sep : -sep) : 0.0;
          d.pixies.rows(row, dim) = static_cast<float>(center + normal(rng));
        }
        t.preds[static_cast<std::size_t>(j)] = c;
        t.rows[static_cast<std::size_t>(j)] = row++;
      }
      d.triples.push_back(t);
    }
  }
  return d;
}

double naive_batch_loss(const Eigen::MatrixXd& w, const Eigen::VectorXd& b,
                        const Eigen::MatrixXd& x, const std::vector<PredicateId>& labels,
                        double alpha, double l2) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double sum = 0.0;
    std::vector<double> t(static_cast<std::size_t>(w.rows()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      double z = w.row(r).dot(x.row(i));
      if (b.size() > 0) z += b(r);
      t[static_cast<std::size_t>(r)] = 1.0 / (1.0 + std::exp(-z));
      sum += t[static_cast<std::size_t>(r)];
    }
    const double tr = t[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
    total += std::log(tr / sum) + alpha * std::log(tr);
  }
  return -total / static_cast<double>(x.rows()) + l2 * w.squaredNorm();
}

}  // namespace

TEST_SUITE("lexicon_model") {

TEST_CASE("truth values at hand-computed points") {
  Eigen::MatrixXd w(2, 2);
  w << 0.0, 0.0, std::log(3.0), 0.0;
  const Lexicon lex(names(2), w);
  Eigen::VectorXd x(2);
  x << 1.0, 5.0;
  CHECK(lex.truth(0, x) == 0.5);
  CHECK(lex.truth(1, x) == doctest::Approx(0.75).epsilon(1e-15));
  x << -40.0 / std::log(3.0), 0.0;
  CHECK(lex.truth(1, x) > 0.0);
  CHECK(lex.log_truth(1, x) == doctest::Approx(-40.0).epsilon(1e-12));
  CHECK_THROWS_AS(lex.truth(2, x), DataError);
  CHECK_THROWS_AS(lex.truth(0, Eigen::VectorXd::Zero(3)), DataError);
}

TEST_CASE("log truth agrees with log of truth and truth is monotone") {
  Eigen::MatrixXd w(1, 1);
  w << 1.0;
  const Lexicon lex(names(1), w);
  double prev = 0.0;
  for (double z = -30.0; z <= 30.0; z += 0.5) {
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, z);
    CHECK(std::abs(lex.log_truth(0, x) - std::log(lex.truth(0, x))) < 1e-9);
    CHECK(lex.truth(0, x) >= prev);
    prev = lex.truth(0, x);
  }
}

TEST_CASE("generation probabilities are truth-proportional") {
  Eigen::MatrixXd w(2, 1);
  w << logit(0.6), logit(0.2);
  const Lexicon lex(names(2), w);
  const Eigen::VectorXd x = Eigen::VectorXd::Ones(1);
  CHECK(lex.generation_prob(0, x) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(lex.generation_prob(1, x) == doctest::Approx(0.25).epsilon(1e-12));

  Eigen::MatrixXd w1(1, 3);
  w1 << 1, 2, 3;
  CHECK(Lexicon(names(1), w1).generation_prob(0, Eigen::VectorXd::Ones(3)) == 1.0);

  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal(0.0, 3.0);
  Eigen::MatrixXd big(50, 5);
  for (Eigen::Index i = 0; i < big.size(); ++i) big.data()[i] = normal(rng);
  const Lexicon many(names(50), big);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd v(5);
    for (int d = 0; d < 5; ++d) v(d) = normal(rng);
    CHECK(std::abs(many.generation_probs(v).sum() - 1.0) < 1e-12);
    CHECK(many.generation_prob(3, v) / many.generation_prob(7, v) ==
          doctest::Approx(many.truth(3, v) / many.truth(7, v)).epsilon(1e-12));
  }
}

TEST_CASE("batch loss matches a direct formula and its gradient") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int v = 6, n = 4, b = 9;
  Eigen::MatrixXd w(v, n), x(b, n);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = normal(rng);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
  std::vector<PredicateId> labels;
  for (int i = 0; i < b; ++i) labels.push_back(i % v);
  Eigen::VectorXd bias(v);
  for (int i = 0; i < v; ++i) bias(i) = normal(rng);

  for (const bool with_bias : {false, true}) {
    const Eigen::VectorXd bb = with_bias ? bias : Eigen::VectorXd();
    for (const double alpha : {0.0, 0.5}) {
      const double l2 = 0.01;
      const auto bl = lexicon_batch_loss(w, bb, x, labels, alpha, l2);
      CHECK(bl.loss == doctest::Approx(naive_batch_loss(w, bb, x, labels, alpha, l2))
                           .epsilon(1e-12));
      std::uniform_int_distribution<int> pick(0, v * n - 1);
      for (int k = 0; k < 20; ++k) {
        const int idx = pick(rng);
        const int r = idx / n, c = idx % n;
        const double h = 1e-5;
        Eigen::MatrixXd hi = w, lo = w;
        hi(r, c) += h;
        lo(r, c) -= h;
        const double fd = (naive_batch_loss(hi, bb, x, labels, alpha, l2) -
                           naive_batch_loss(lo, bb, x, labels, alpha, l2)) /
                          (2 * h);
        CHECK(std::abs(fd - bl.grad_weights(r, c)) <=
              1e-4 * std::max(std::abs(fd), 1e-3));
      }
      if (with_bias) {
        for (int r = 0; r < v; ++r) {
          const double h = 1e-5;
          Eigen::VectorXd hi = bb, lo = bb;
          hi(r) += h;
          lo(r) -= h;
          const double fd = (naive_batch_loss(w, hi, x, labels, alpha, l2) -
                             naive_batch_loss(w, lo, x, labels, alpha, l2)) /
                            (2 * h);
          CHECK(std::abs(fd - bl.grad_bias(r)) <= 1e-4 * std::max(std::abs(fd), 1e-3));
        }
      }
    }
  }
}

TEST_CASE("separable two-class task reaches high AUC") {
  const auto d = two_class(300, 2.5, 3);
  LexiconTrainConfig config;
  config.epochs = 30;
  config.lr = 0.05;
  config.batch_size = 64;
  const auto result = train_lexicon(d.triples, d.pixies, names(2), config);
  const auto report = auc_report(result.lexicon, d.triples, d.pixies, 0);
  REQUIRE(report.size() == 2);
  for (const auto& r : report) CHECK(r.auc >= 0.99);
}

TEST_CASE("full-batch loss decreases monotonically at a small learning rate") {
  const auto d = two_class(100, 1.0, 4);
  LexiconTrainConfig config;
  config.epochs = 60;
  config.lr = 1e-3;
  config.lr_decay = 1.0;
  config.batch_size = 100000;
  const auto result = train_lexicon(d.triples, d.pixies, names(2), config);
  for (std::size_t e = 1; e < result.log.size(); ++e) {
    CHECK(result.log[e].loss <= result.log[e - 1].loss + 1e-6);
  }
  CHECK(result.log.back().loss < result.log.front().loss);
}

TEST_CASE("training is reproducible from the seed") {
  const auto d = two_class(50, 1.0, 5);
  LexiconTrainConfig config;
  config.epochs = 5;
  config.batch_size = 32;
  const auto a = train_lexicon(d.triples, d.pixies, names(2), config);
  const auto b = train_lexicon(d.triples, d.pixies, names(2), config);
  CHECK(a.lexicon.weights() == b.lexicon.weights());
  config.seed = 1;
  const auto c = train_lexicon(d.triples, d.pixies, names(2), config);
  CHECK(c.lexicon.weights() != a.lexicon.weights());
}

TEST_CASE("truth regularization raises total truth") {
  const auto world = fds::testing::make_synthetic_world({.triples = 900});
  FilterPolicy loose;
  loose.mode = FilterMode::kLoose;
  const auto vocab = build_vocabulary(world.triples, loose);
  const auto set = filter_triples(world.triples, vocab);
  LexiconTrainConfig config;
  config.epochs = 15;
  config.lr = 0.02;
  config.batch_size = 128;
  const auto plain = train_lexicon(set.triples, world.pixies, vocab, config);
  config.alpha = 0.5;
  const auto reg = train_lexicon(set.triples, world.pixies, vocab, config);
  const Eigen::MatrixXd pix = world.pixies.rows.topRows(1000).cast<double>();
  CHECK(total_truth_audit(reg.lexicon, pix) > total_truth_audit(plain.lexicon, pix));
}

TEST_CASE("AUC edge cases") {
  const std::vector<double> pos = {0.9, 0.8}, neg = {0.1, 0.2, 0.3};
  CHECK(auc_from_scores(pos, neg) == 1.0);
  CHECK(auc_from_scores(neg, pos) == 0.0);
  const std::vector<double> same = {0.5, 0.5, 0.5};
  CHECK(auc_from_scores(same, same) == 0.5);

  const Lexicon zero(names(1), Eigen::MatrixXd::Zero(1, 2));
  const Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 2);
  CHECK_THROWS_AS(auc_roc(zero, 0, one, Eigen::MatrixXd::Ones(5, 2), 0), DataError);
  const Eigen::MatrixXd p3 = Eigen::MatrixXd::Ones(3, 2);
  CHECK(auc_roc(zero, 0, p3, Eigen::MatrixXd::Zero(5, 2), 0) == 0.5);
  CHECK_THROWS_AS(auc_roc(zero, 0, p3, Eigen::MatrixXd::Zero(2, 2), 0), DataError);
}

TEST_CASE("total truth of an all-zero lexicon is half the vocabulary") {
  const Lexicon zero(names(10), Eigen::MatrixXd::Zero(10, 3));
  std::mt19937_64 rng(6);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd pix(1000, 3);
  for (Eigen::Index i = 0; i < pix.size(); ++i) pix.data()[i] = normal(rng);
  CHECK(total_truth_audit(zero, pix) == 5.0);
}

TEST_CASE("predicates reaching a truth threshold") {
  Eigen::MatrixXd w(2, 1);
  w << 10.0, -10.0;
  const Lexicon lex(names(2), w);
  FeatureFile f;
  f.rows.resize(2, 1);
  f.rows << 1.0f, 1.0f;
  const std::vector<LabeledTriple> t = {{"i", {0, 1, 0}, {0, 1, 0}}};
  CHECK(predicates_reaching_truth(lex, t, f, 0.1) == 1);
}

TEST_CASE("lexicon files round-trip with and without bias") {
  TempDir dir;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd w(3, 4);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = normal(rng);
  const Lexicon plain(names(3), w);
  write_lexicon(dir / "a.fdsl", plain);
  const auto a = read_lexicon(dir / "a.fdsl");
  CHECK(a.weights() == w);
  CHECK_FALSE(a.has_bias());
  CHECK(a.vocab() == plain.vocab());

  const Lexicon biased(names(3), w, Eigen::VectorXd::LinSpaced(3, -1, 1));
  write_lexicon(dir / "b.fdsl", biased);
  const auto b = read_lexicon(dir / "b.fdsl");
  CHECK(b.has_bias());
  CHECK(b.bias_vector() == biased.bias_vector());
}

TEST_CASE("configuration and numerical failures") {
  LexiconTrainConfig bad;
  bad.epochs = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  const auto d = two_class(20, 1.0, 8);
  LexiconTrainConfig huge;
  huge.lr = 1e200;
  huge.l2_weight = 1.0;
  huge.epochs = 3;
  CHECK_THROWS_AS(train_lexicon(d.triples, d.pixies, names(2), huge), NumericalError);
  CHECK_THROWS_AS(Lexicon(names(2), Eigen::MatrixXd::Zero(3, 2)), DataError);
}

}  // TEST_SUITE
