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

#include "fds/variational.hpp"

#include <cmath>
#include <random>
#include <string>

#include "fds/adam.hpp"
#include "fds/binary_io.hpp"
#include "fds/error.hpp"
#include "fds/numeric.hpp"

namespace fds {
namespace {

// Semi-analytical moment constants.
constexpr double kSigmoidVarScale = 0.368;
constexpr double kLogSigmoidShift = 0.319;
constexpr double kLogSigmoidShiftPower = 0.781;
constexpr double kLogSigmoidVarScale = 0.205;
constexpr double kLogSigmoidVarPower = 0.870;

void check_var(double var) {
  if (!(var >= 0.0)) {
    throw NumericalError("variance must be non-negative, got " +
                         io::format_real(var));
  }
}

void check_shapes(const VariationalPosterior& q, const Lexicon& lexicon,
                  const WorldModel& world) {
  if (q.mean.size() != world.dim() || q.var.size() != world.dim()) {
    throw DataError("posterior dimension does not match the world model");
  }
  if (lexicon.dim() != world.n()) {
    throw DataError("lexicon pixie dimension " + std::to_string(lexicon.dim()) +
                    " does not match world model n = " +
                    std::to_string(world.n()));
  }
}

// Closed-form KL against the world prior, with gradient.
double kl_to_world(const VariationalPosterior& q, const WorldModel& world,
                   Eigen::VectorXd* d_mean, Eigen::VectorXd* d_log_var) {
  const Eigen::MatrixXd& k = world.precision();
  const Eigen::VectorXd delta = q.mean - world.mu();
  const Eigen::VectorXd k_delta = k * delta;
  const double dim = static_cast<double>(q.mean.size());
  const double kl =
      0.5 * (world.log_det_sigma() - q.var.array().log().sum() - dim +
             k.diagonal().dot(q.var) + delta.dot(k_delta));
  if (d_mean != nullptr) {
    *d_mean = k_delta;
    *d_log_var = 0.5 * (k.diagonal().cwiseProduct(q.var).array() - 1.0).matrix();
  }
  return kl;
}

}  // namespace

int ObservationPattern::count() const {
  int c = 0;
  for (const auto& o : observed) {
    c += o.has_value() ? 1 : 0;
  }
  return c;
}

void ObservationPattern::validate(const Lexicon& lexicon) const {
  if (count() == 0) {
    throw DataError("observation pattern has no observed predicate");
  }
  for (const auto& o : observed) {
    if (o && (*o < 0 || *o >= lexicon.size())) {
      throw DataError("observation references unknown predicate id " +
                      std::to_string(*o));
    }
  }
}

void VariationalPosterior::validate() const {
  if (mean.size() != var.size() || mean.size() % 3 != 0) {
    throw DataError("posterior mean and variance have inconsistent sizes");
  }
  if (!mean.allFinite() || !var.allFinite() || !(var.array() > 0.0).all()) {
    throw NumericalError("posterior has non-finite or non-positive entries");
  }
}

const char* to_string(NormalizerBound bound) {
  return bound == NormalizerBound::kOff ? "off" : "jensen";
}

NormalizerBound parse_normalizer_bound(std::string_view text) {
  if (text == "off") return NormalizerBound::kOff;
  if (text == "jensen") return NormalizerBound::kJensen;
  throw ConfigError("normalizer_bound must be 'off' or 'jensen'");
}

void InferenceConfig::validate() const {
  if (!(beta >= 0.0)) throw ConfigError("beta must be >= 0");
  if (epochs < 1) throw ConfigError("inference epochs must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("inference lr must be > 0");
  if (!(lr_decay > 0.0)) throw ConfigError("inference lr_decay must be > 0");
  if (lr_step_epochs < 1) throw ConfigError("inference lr_step_epochs must be >= 1");
  if (!(init_jitter >= 0.0)) throw ConfigError("init_jitter must be >= 0");
}

double expected_sigmoid(double mu, double var) {
  check_var(var);
  return sigmoid(mu / std::sqrt(1.0 + kSigmoidVarScale * var));
}

double expected_log_sigmoid(double mu, double var) {
  check_var(var);
  const double num = mu - kLogSigmoidShift * std::pow(var, kLogSigmoidShiftPower);
  const double den =
      std::sqrt(1.0 + kLogSigmoidVarScale * std::pow(var, kLogSigmoidVarPower));
  return log_sigmoid(num / den);
}

MomentDerivatives expected_sigmoid_derivatives(double mu, double var) {
  check_var(var);
  const double a = 1.0 + kSigmoidVarScale * var;
  const double root = std::sqrt(a);
  const double u = mu / root;
  const double s = sigmoid(u);
  const double slope = s * sigmoid(-u);
  return {s, slope / root, slope * (-0.5 * mu * kSigmoidVarScale / (a * root))};
}

MomentDerivatives expected_log_sigmoid_derivatives(double mu, double var) {
  check_var(var);
  const double shift = kLogSigmoidShift * std::pow(var, kLogSigmoidShiftPower);
  const double a = 1.0 + kLogSigmoidVarScale * std::pow(var, kLogSigmoidVarPower);
  const double den = std::sqrt(a);
  const double num = mu - shift;
  const double u = num / den;
  const double slope = sigmoid(-u);  // d log sigmoid(u) / du
  MomentDerivatives out{log_sigmoid(u), slope / den, 0.0};
  if (var > 0.0) {
    const double d_num = -kLogSigmoidShiftPower * shift / var;
    const double d_a =
        kLogSigmoidVarScale * kLogSigmoidVarPower *
        std::pow(var, kLogSigmoidVarPower - 1.0);
    const double du = d_num / den - 0.5 * num * d_a / (a * den);
    out.d_var = slope * du;
  }
  return out;
}

double kl_gaussian(const VariationalPosterior& q, const Eigen::VectorXd& p_mean,
                   const Eigen::MatrixXd& p_cov) {
  const Eigen::Index k = q.mean.size();
  if (q.var.size() != k || p_mean.size() != k || p_cov.rows() != k ||
      p_cov.cols() != k) {
    throw DataError("KL operands have mismatched dimensions");
  }
  q.validate();
  Eigen::LLT<Eigen::MatrixXd> llt(p_cov);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("prior covariance is not positive definite");
  }
  const Eigen::MatrixXd l = llt.matrixL();
  const double log_det_p = 2.0 * l.diagonal().array().log().sum();
  const Eigen::MatrixXd l_inv = llt.matrixL().solve(Eigen::MatrixXd::Identity(k, k));
  // diag(P^-1)_d = ||L^-1 e_d||^2
  const Eigen::VectorXd p_inv_diag = l_inv.colwise().squaredNorm().transpose();
  const Eigen::VectorXd white = llt.matrixL().solve(q.mean - p_mean);
  const double kl = 0.5 * (log_det_p - q.var.array().log().sum() -
                           static_cast<double>(k) + p_inv_diag.dot(q.var) +
                           white.squaredNorm());
  return std::max(kl, 0.0);
}

std::pair<double, double> pre_activation_moments(const VariationalPosterior& q,
                                                 Node node,
                                                 const Lexicon& lexicon,
                                                 PredicateId r) {
  const Eigen::VectorXd mu = q.node_mean(node);
  const Eigen::VectorXd var = q.node_var(node);
  if (r < 0 || r >= lexicon.size()) {
    throw DataError("unknown predicate id " + std::to_string(r));
  }
  if (mu.size() != lexicon.dim()) {
    throw DataError("posterior node dimension does not match the lexicon");
  }
  const auto w = lexicon.weights().row(r);
  return {w.dot(mu) + lexicon.bias(r), w.cwiseAbs2().dot(var.transpose())};
}

ElboGradient elbo_gradient(const VariationalPosterior& q,
                           const ObservationPattern& pattern,
                           const Lexicon& lexicon, const WorldModel& world,
                           double beta, NormalizerBound normalizer) {
  check_shapes(q, lexicon, world);
  pattern.validate(lexicon);
  const Eigen::Index n = world.n();
  ElboGradient g;
  g.d_mean = Eigen::VectorXd::Zero(3 * n);
  g.d_log_var = Eigen::VectorXd::Zero(3 * n);

  for (Node node : kAllNodes) {
    const auto r = pattern.at(node);
    if (!r) continue;
    const Eigen::Index off = index(node) * n;
    const Eigen::VectorXd mu = q.mean.segment(off, n);
    const Eigen::VectorXd var = q.var.segment(off, n);
    const Eigen::VectorXd w = lexicon.weights().row(*r).transpose();
    const Eigen::VectorXd w2 = w.cwiseAbs2();
    const MomentDerivatives d = expected_log_sigmoid_derivatives(
        w.dot(mu) + lexicon.bias(*r), w2.dot(var));
    g.value += d.value;
    g.d_mean.segment(off, n) += d.d_mu * w;
    g.d_log_var.segment(off, n) += d.d_var * w2.cwiseProduct(var);

    if (normalizer == NormalizerBound::kJensen) {
      const Eigen::MatrixXd& big_w = lexicon.weights();
      Eigen::VectorXd m = big_w * mu;
      if (lexicon.has_bias()) m += lexicon.bias_vector();
      const Eigen::VectorXd s = big_w.cwiseAbs2() * var;
      Eigen::VectorXd dm(m.size());
      Eigen::VectorXd ds(m.size());
      double total = 0.0;
      for (Eigen::Index i = 0; i < m.size(); ++i) {
        const MomentDerivatives e = expected_sigmoid_derivatives(m[i], s[i]);
        total += e.value;
        dm[i] = e.d_mu;
        ds[i] = e.d_var;
      }
      g.value -= std::log(total);
      g.d_mean.segment(off, n) -= big_w.transpose() * dm / total;
      g.d_log_var.segment(off, n) -=
          (big_w.cwiseAbs2().transpose() * ds / total).cwiseProduct(var);
    }
  }

  Eigen::VectorXd kl_mean;
  Eigen::VectorXd kl_log_var;
  const double kl = kl_to_world(q, world, &kl_mean, &kl_log_var);
  g.value -= beta * kl;
  g.d_mean -= beta * kl_mean;
  g.d_log_var -= beta * kl_log_var;
  return g;
}

double elbo(const VariationalPosterior& q, const ObservationPattern& pattern,
            const Lexicon& lexicon, const WorldModel& world, double beta,
            NormalizerBound normalizer) {
  check_shapes(q, lexicon, world);
  pattern.validate(lexicon);
  double value = 0.0;
  for (Node node : kAllNodes) {
    const auto r = pattern.at(node);
    if (!r) continue;
    const auto [m, s] = pre_activation_moments(q, node, lexicon, *r);
    value += expected_log_sigmoid(m, s);
    if (normalizer == NormalizerBound::kJensen) {
      value -= std::log(approx_truths(q, node, lexicon).sum());
    }
  }
  return value - beta * kl_to_world(q, world, nullptr, nullptr);
}

InferenceResult infer_posterior(const ObservationPattern& pattern,
                                const Lexicon& lexicon, const WorldModel& world,
                                const InferenceConfig& config) {
  config.validate();
  pattern.validate(lexicon);
  const Eigen::Index d = world.dim();

  Eigen::VectorXd params(2 * d);
  params.head(d) = world.mu();
  params.tail(d) = world.sigma().diagonal().array().log().matrix();
  if (config.init_jitter > 0.0) {
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (Eigen::Index i = 0; i < d; ++i) {
      params[i] += config.init_jitter * std::sqrt(world.sigma()(i, i)) * noise(rng);
    }
  }

  Adam adam(2 * d);
  const StepSchedule schedule{config.lr, config.lr_decay, config.lr_step_epochs};
  InferenceResult result;
  result.trace.reserve(static_cast<std::size_t>(config.epochs));
  VariationalPosterior q;
  Eigen::VectorXd grad(2 * d);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    q.mean = params.head(d);
    q.var = params.tail(d).array().exp().matrix();
    const ElboGradient g =
        elbo_gradient(q, pattern, lexicon, world, config.beta, config.normalizer);
    if (!std::isfinite(g.value) || !g.d_mean.allFinite() ||
        !g.d_log_var.allFinite()) {
      std::string tail;
      const std::size_t from = result.trace.size() > 5 ? result.trace.size() - 5 : 0;
      for (std::size_t i = from; i < result.trace.size(); ++i) {
        tail += " " + io::format_real(result.trace[i]);
      }
      throw NumericalError("non-finite ELBO at epoch " + std::to_string(epoch) +
                           "; last values:" + tail);
    }
    result.trace.push_back(g.value);
    grad.head(d) = -g.d_mean;
    grad.tail(d) = -g.d_log_var;
    adam.step(params, grad, schedule.at(epoch));
  }
  q.mean = params.head(d);
  q.var = params.tail(d).array().exp().matrix();
  result.elbo = elbo(q, pattern, lexicon, world, config.beta, config.normalizer);
  if (!std::isfinite(result.elbo)) {
    throw NumericalError("non-finite final ELBO");
  }
  result.posterior = std::move(q);
  return result;
}

double approx_truth(const VariationalPosterior& q, Node node,
                    const Lexicon& lexicon, PredicateId r) {
  const auto [m, s] = pre_activation_moments(q, node, lexicon, r);
  return expected_sigmoid(m, s);
}

Eigen::VectorXd approx_truths(const VariationalPosterior& q, Node node,
                              const Lexicon& lexicon) {
  const Eigen::VectorXd mu = q.node_mean(node);
  const Eigen::VectorXd var = q.node_var(node);
  if (mu.size() != lexicon.dim()) {
    throw DataError("posterior node dimension does not match the lexicon");
  }
  Eigen::VectorXd m = lexicon.weights() * mu;
  if (lexicon.has_bias()) m += lexicon.bias_vector();
  const Eigen::VectorXd s = lexicon.weights().cwiseAbs2() * var;
  Eigen::VectorXd out(m.size());
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    out[i] = expected_sigmoid(m[i], s[i]);
  }
  return out;
}

}  // namespace fds
