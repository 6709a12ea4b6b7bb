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
#include <fstream>
#include <random>

#include <doctest.h>

#include "fds/error.hpp"
#include "fds/numeric.hpp"
#include "fds/world_model.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace fds;
using fds::testing::TempDir;

namespace {

std::vector<SituationSample> to_samples(const Eigen::MatrixXd& rows, Eigen::Index n) {
  std::vector<SituationSample> out;
  out.reserve(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    out.push_back({rows.row(i).segment(0, n).transpose(),
                   rows.row(i).segment(n, n).transpose(),
                   rows.row(i).segment(2 * n, n).transpose()});
  }
  return out;
}

Eigen::MatrixXd brute_covariance(const Eigen::MatrixXd& rows) {
  const Eigen::VectorXd mean = rows.colwise().mean().transpose();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(rows.cols(), rows.cols());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const Eigen::VectorXd d = rows.row(i).transpose() - mean;
    cov += d * d.transpose();
  }
  return cov / static_cast<double>(rows.rows());
}

// A chain Gaussian for n = 2: build a precision with zero (X,Z) blocks.
Eigen::MatrixXd chain_sigma(std::mt19937_64& rng) {
  const Eigen::MatrixXd a = fds::testing::random_spd(4, 0.5, 2.0, rng);
  const Eigen::MatrixXd b = fds::testing::random_spd(4, 0.5, 2.0, rng);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(6, 6);
  k.topLeftCorner(4, 4) += a;
  k.bottomRightCorner(4, 4) += b;
  return k.inverse();
}

double total_log_likelihood(const WorldModel& m, const Eigen::MatrixXd& rows) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    sum += log_density(m, Eigen::VectorXd(rows.row(i).transpose()));
  }
  return sum;
}

}  // namespace

TEST_SUITE("world_model") {

TEST_CASE("standard normal density at the mean") {
  const WorldModel m(1, Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3), false);
  CHECK(log_density(m, Eigen::VectorXd::Zero(3)) ==
        doctest::Approx(-1.5 * std::log(2 * M_PI)).epsilon(1e-14));
}

TEST_CASE("log density matches a dense formula oracle") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::MatrixXd sigma = fds::testing::random_spd(6, 0.3, 3.0, rng);
    Eigen::VectorXd mu(6), s(6);
    for (int i = 0; i < 6; ++i) {
      mu(i) = normal(rng);
      s(i) = normal(rng) * 2;
    }
    const WorldModel m(2, mu, sigma, false);
    CHECK(std::abs(log_density(m, s) - fds::testing::naive_log_density(mu, sigma, s)) <
          1e-9);
  }
}

TEST_CASE("scaling sigma by 4 lowers the peak by (3n/2) log 4") {
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd sigma = fds::testing::random_spd(6, 0.5, 2.0, rng);
  const Eigen::VectorXd mu = Eigen::VectorXd::Constant(6, 0.3);
  const WorldModel a(2, mu, sigma, false);
  const WorldModel b(2, mu, 4.0 * sigma, false);
  CHECK(log_density(a, mu) - log_density(b, mu) ==
        doctest::Approx(3.0 * std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("shape errors and invalid covariances") {
  const WorldModel m(1, Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3), false);
  CHECK_THROWS_AS(log_density(m, Eigen::VectorXd::Zero(4)), DataError);
  CHECK_THROWS_AS(WorldModel(2, Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3), false),
                  DataError);
  Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(3, 3);
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(WorldModel(1, Eigen::VectorXd::Zero(3), asym, false), NumericalError);
  CHECK_THROWS_AS(WorldModel(1, Eigen::VectorXd::Zero(3), -Eigen::MatrixXd::Identity(3, 3), false),
                  NumericalError);
}

TEST_CASE("marginals") {
  std::mt19937_64 rng(3);
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(6, 6);
  sigma.block(0, 0, 2, 2) = fds::testing::random_spd(2, 0.5, 2.0, rng);
  sigma.block(2, 2, 2, 2) = fds::testing::random_spd(2, 0.5, 2.0, rng);
  sigma.block(4, 4, 2, 2) = fds::testing::random_spd(2, 0.5, 2.0, rng);
  Eigen::VectorXd mu(6);
  mu << 1, 2, 3, 4, 5, 6;
  const WorldModel m(2, mu, sigma, false);
  const auto mx = marginal(m, Node::kX);
  CHECK(mx.cov == sigma.block(0, 0, 2, 2));
  CHECK(marginal(m, Node::kY).mean == mu.segment(2, 2));
  const auto xz = marginal(m, Node::kX, Node::kZ);
  CHECK(xz.mean(2) == 5.0);
  CHECK(xz.cov.block(2, 2, 2, 2) == sigma.block(4, 4, 2, 2));
  CHECK(xz.cov.block(0, 2, 2, 2).isZero());
}

TEST_CASE("X marginal agrees with Monte Carlo samples of the joint") {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd sigma = fds::testing::random_spd(6, 0.5, 2.0, rng);
  const Eigen::VectorXd mu = Eigen::VectorXd::LinSpaced(6, -1.0, 1.0);
  const WorldModel m(2, mu, sigma, false);
  const int draws = 1000000;
  const Eigen::MatrixXd rows = fds::testing::sample_gaussian(mu, sigma, draws, rng);
  const Eigen::MatrixXd x = rows.leftCols(2);
  const Eigen::VectorXd mc_mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd mc_cov = brute_covariance(x);
  const auto g = marginal(m, Node::kX);
  for (int i = 0; i < 2; ++i) {
    const double se = std::sqrt(g.cov(i, i) / draws);
    CHECK(std::abs(mc_mean(i) - g.mean(i)) < 5 * se);
    for (int j = 0; j < 2; ++j) {
      const double se_cov =
          std::sqrt((g.cov(i, i) * g.cov(j, j) + g.cov(i, j) * g.cov(i, j)) / draws);
      CHECK(std::abs(mc_cov(i, j) - g.cov(i, j)) < 5 * se_cov);
    }
  }
}

TEST_CASE("unconstrained fit equals the brute-force sample covariance") {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd sigma = fds::testing::random_spd(6, 0.5, 2.0, rng);
  const Eigen::VectorXd mu = Eigen::VectorXd::Constant(6, 10.0);
  const Eigen::MatrixXd rows = fds::testing::sample_gaussian(mu, sigma, 5000, rng);
  const auto samples = to_samples(rows, 2);
  const auto m = fit_world_model(stream_situations(samples), {.ci_constrained = false});
  const Eigen::MatrixXd brute = brute_covariance(rows);
  CHECK((m.sigma() - brute).cwiseAbs().maxCoeff() < 1e-12 * brute.cwiseAbs().maxCoeff() * 10);
  CHECK((m.mu() - rows.colwise().mean().transpose()).cwiseAbs().maxCoeff() < 1e-12 * 10 * 10);
  CHECK((m.precision() * m.sigma() - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() <
        1e-6);
}

TEST_CASE("constrained fit: zero (X,Z) precision, exact clique marginals") {
  std::mt19937_64 rng(6);
  const Eigen::MatrixXd sigma = fds::testing::random_spd(9, 0.5, 2.0, rng);
  const Eigen::MatrixXd rows =
      fds::testing::sample_gaussian(Eigen::VectorXd::Zero(9), sigma, 4000, rng);
  const auto samples = to_samples(rows, 3);
  const auto moments = sample_moments(stream_situations(samples));
  const auto m = fit_world_model(stream_situations(samples));
  const Eigen::Index n = 3;

  CHECK(m.precision().block(0, 2 * n, n, n).isZero(0.0));
  CHECK(m.precision().block(2 * n, 0, n, n).isZero(0.0));
  CHECK(m.sigma().topLeftCorner(2 * n, 2 * n) == moments.cov.topLeftCorner(2 * n, 2 * n));
  CHECK(m.sigma().bottomRightCorner(2 * n, 2 * n) ==
        moments.cov.bottomRightCorner(2 * n, 2 * n));
  const Eigen::MatrixXd brute = brute_covariance(rows);
  CHECK((m.sigma().topLeftCorner(2 * n, 2 * n) - brute.topLeftCorner(2 * n, 2 * n))
            .cwiseAbs()
            .maxCoeff() < 1e-10);
  CHECK((m.precision() * m.sigma() - Eigen::MatrixXd::Identity(9, 9)).cwiseAbs().maxCoeff() <
        1e-6);

  // cov(X, Z | Y) = 0 in the fitted model.
  const Eigen::MatrixXd cond = m.block(Node::kX, Node::kZ) -
                               m.block(Node::kX, Node::kY) *
                                   m.block(Node::kY, Node::kY).inverse() *
                                   m.block(Node::kY, Node::kZ);
  CHECK(cond.cwiseAbs().maxCoeff() < 1e-10);

  const auto free = fit_world_model(stream_situations(samples), {.ci_constrained = false});
  CHECK(total_log_likelihood(m, rows) <= total_log_likelihood(free, rows));
}

TEST_CASE("chain-structured generator is recovered") {
  std::mt19937_64 rng(7);
  const Eigen::MatrixXd truth = chain_sigma(rng);
  Eigen::VectorXd mu(6);
  mu << 0.5, -0.5, 1.0, 0.0, -1.0, 2.0;
  const Eigen::MatrixXd rows = fds::testing::sample_gaussian(mu, truth, 200000, rng);
  const auto samples = to_samples(rows, 2);
  const auto m = fit_world_model(stream_situations(samples));
  CHECK((m.sigma() - truth).cwiseAbs().maxCoeff() < 0.02);
  CHECK((m.mu() - mu).cwiseAbs().maxCoeff() < 0.02);
  CHECK(m.precision().block(0, 4, 2, 2).isZero(0.0));
}

TEST_CASE("a constrained model built by hand is chain-completed") {
  std::mt19937_64 rng(8);
  const Eigen::MatrixXd sigma = fds::testing::random_spd(6, 0.5, 2.0, rng);
  const WorldModel m(2, Eigen::VectorXd::Zero(6), sigma, true);
  CHECK(m.block(Node::kX, Node::kY) == sigma.block(0, 2, 2, 2));
  CHECK((m.precision() * m.sigma() - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() <
        1e-6);
  const WorldModel again(2, Eigen::VectorXd::Zero(6), m.sigma(), true);
  CHECK(again.sigma() == m.sigma());
}

TEST_CASE("degenerate samples") {
  std::vector<SituationSample> same(
      20, {Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1)});
  CHECK_THROWS_AS(fit_world_model(stream_situations(same)), NumericalError);

  std::vector<SituationSample> few(
      3, {Eigen::VectorXd::Ones(1), Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)});
  CHECK_THROWS_AS(fit_world_model(stream_situations(few)), DataError);
}

TEST_CASE("ridge is applied only when the covariance is singular") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<SituationSample> s;
  for (int i = 0; i < 200; ++i) {
    const double a = normal(rng);
    s.push_back({Eigen::VectorXd::Constant(1, a), Eigen::VectorXd::Constant(1, a),
                 Eigen::VectorXd::Constant(1, normal(rng))});
  }
  CHECK_THROWS_AS(
      fit_world_model(stream_situations(s), {.ci_constrained = true, .ridge_on_failure = false}),
      NumericalError);
  const auto m = fit_world_model(stream_situations(s));
  const auto moments = sample_moments(stream_situations(s));
  const double ridge = 1e-6 * moments.cov.trace() / 3.0;
  CHECK(m.sigma()(0, 0) == doctest::Approx(moments.cov(0, 0) + ridge).epsilon(1e-12));
}

TEST_CASE("density integrates to one over a 6 sd box") {
  const Eigen::VectorXd mu = Eigen::VectorXd::Zero(3);
  Eigen::MatrixXd sigma(3, 3);
  sigma << 1.0, 0.3, 0.1, 0.3, 0.8, 0.2, 0.1, 0.2, 1.5;
  const WorldModel m(1, mu, sigma, false);
  std::mt19937_64 rng(10);
  double volume = 1.0;
  std::vector<std::uniform_real_distribution<double>> u;
  for (int i = 0; i < 3; ++i) {
    const double half = 6.0 * std::sqrt(sigma(i, i));
    u.emplace_back(-half, half);
    volume *= 2 * half;
  }
  const int draws = 1000000;
  double sum = 0.0;
  Eigen::VectorXd s(3);
  for (int k = 0; k < draws; ++k) {
    for (int i = 0; i < 3; ++i) s(i) = u[static_cast<std::size_t>(i)](rng);
    sum += std::exp(log_density(m, s));
  }
  CHECK(volume * sum / draws == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("fit diagnostics separate Gaussian from uniform dimensions") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(-1.7, 1.7);
  const int draws = 1000000;
  std::vector<SituationSample> s;
  s.reserve(draws);
  for (int i = 0; i < draws; ++i) {
    s.push_back({Eigen::VectorXd::Constant(1, normal(rng)),
                 Eigen::VectorXd::Constant(1, 2.0 + 0.5 * normal(rng)),
                 Eigen::VectorXd::Constant(1, uniform(rng))});
  }
  const auto m = fit_world_model(stream_situations(s), {.ci_constrained = false});
  const auto d = fit_diagnostics(m, stream_situations(s));
  REQUIRE(d.dims.size() == 3);
  CHECK(d.dims[0].missing_area < 0.01);
  CHECK(d.dims[1].missing_area < 0.01);
  CHECK(d.dims[2].missing_area > 5 * std::max(d.dims[0].missing_area, d.dims[1].missing_area));
  CHECK(d.dims[2].kurtosis == doctest::Approx(-1.2).epsilon(0.02));
  CHECK(std::abs(d.dims[0].skewness) < 0.01);

  const std::vector<SituationSample> small(s.begin(), s.begin() + 999);
  CHECK_THROWS_AS(fit_diagnostics(m, stream_situations(small)), DataError);
}

TEST_CASE("situations read from triples and pixie rows") {
  FeatureFile pixies;
  pixies.rows.resize(4, 2);
  pixies.rows << 1, 2, 3, 4, 5, 6, 7, 8;
  const std::vector<LabeledTriple> t = {{"i", {0, 1, 2}, {3, 0, 2}}};
  Eigen::VectorXd seen;
  stream_situations(t, pixies)([&](const Eigen::Ref<const Eigen::VectorXd>& v) { seen = v; });
  Eigen::VectorXd expect(6);
  expect << 7, 8, 1, 2, 5, 6;
  CHECK(seen == expect);
}

TEST_CASE("world model files round-trip exactly") {
  TempDir dir;
  std::mt19937_64 rng(12);
  const WorldModel m(2, Eigen::VectorXd::LinSpaced(6, 0, 1),
                     fds::testing::random_spd(6, 0.5, 2.0, rng), true);
  write_world_model(dir / "w.fdsw", m);
  const auto r = read_world_model(dir / "w.fdsw");
  CHECK(r.sigma() == m.sigma());
  CHECK(r.mu() == m.mu());
  CHECK(r.ci_constrained());
  CHECK(r.precision() == m.precision());

  const auto size = std::filesystem::file_size(dir / "w.fdsw");
  std::filesystem::resize_file(dir / "w.fdsw", size - 8);
  CHECK_THROWS_AS(read_world_model(dir / "w.fdsw"), DataError);
}

}  // TEST_SUITE
