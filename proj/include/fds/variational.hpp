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

#ifndef FDS_VARIATIONAL_HPP_
#define FDS_VARIATIONAL_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "fds/data_model.hpp"
#include "fds/lexicon_model.hpp"
#include "fds/world_model.hpp"

namespace fds {

// Observed predicates per situation node; at least one must be set.
struct ObservationPattern {
  std::array<std::optional<PredicateId>, 3> observed;

  ObservationPattern& set(Node node, PredicateId r) {
    observed[static_cast<std::size_t>(index(node))] = r;
    return *this;
  }
  std::optional<PredicateId> at(Node node) const {
    return observed[static_cast<std::size_t>(index(node))];
  }
  int count() const;
  // Throws DataError on an empty pattern or an id outside the lexicon.
  void validate(const Lexicon& lexicon) const;
};

// Diagonal Gaussian over a 3n-dimensional situation.
struct VariationalPosterior {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;

  Eigen::Index n() const { return mean.size() / 3; }
  Eigen::VectorXd node_mean(Node node) const {
    return mean.segment(index(node) * n(), n());
  }
  Eigen::VectorXd node_var(Node node) const {
    return var.segment(index(node) * n(), n());
  }
  // Throws NumericalError unless var > 0 and everything is finite.
  void validate() const;
};

enum class NormalizerBound {
  kOff,     // observed terms use E[log t_r] only
  kJensen,  // also subtract log sum_i E[t_i]
};

const char* to_string(NormalizerBound bound);
NormalizerBound parse_normalizer_bound(std::string_view text);

struct InferenceConfig {
  double beta = 0.1;
  int epochs = 800;
  double lr = 0.03;
  double lr_decay = 0.6;
  int lr_step_epochs = 50;
  std::uint64_t seed = 0;
  // Std-devs (relative to the prior) of seeded noise added to the initial
  // mean. Zero starts exactly at the prior.
  double init_jitter = 0.0;
  NormalizerBound normalizer = NormalizerBound::kOff;

  void validate() const;
};

// E[sigmoid(x)] for x ~ N(mu, var): sigmoid(mu / sqrt(1 + 0.368 var)).
double expected_sigmoid(double mu, double var);
// E[log sigmoid(x)] for x ~ N(mu, var):
//   log sigmoid((mu - 0.319 var^0.781) / sqrt(1 + 0.205 var^0.870)).
double expected_log_sigmoid(double mu, double var);

struct MomentDerivatives {
  double value = 0.0;
  double d_mu = 0.0;
  double d_var = 0.0;  // 0 at var == 0, where the true slope is unbounded
};
MomentDerivatives expected_sigmoid_derivatives(double mu, double var);
MomentDerivatives expected_log_sigmoid_derivatives(double mu, double var);

// KL(Q || P) for diagonal Q and full-covariance P, via Cholesky of p_cov.
// Throws NumericalError if p_cov is not positive definite.
double kl_gaussian(const VariationalPosterior& q, const Eigen::VectorXd& p_mean,
                   const Eigen::MatrixXd& p_cov);

// Pre-activation moments of predicate r under the posterior at `node`:
// mean v.mu_node + b and variance sum_d v_d^2 var_node,d.
std::pair<double, double> pre_activation_moments(const VariationalPosterior& q,
                                                 Node node,
                                                 const Lexicon& lexicon,
                                                 PredicateId r);

// sum over observed (node, r) of E[log t_r] - beta KL(Q || world).
double elbo(const VariationalPosterior& q, const ObservationPattern& pattern,
            const Lexicon& lexicon, const WorldModel& world, double beta,
            NormalizerBound normalizer = NormalizerBound::kOff);

struct ElboGradient {
  double value = 0.0;
  Eigen::VectorXd d_mean;
  Eigen::VectorXd d_log_var;
};

// ELBO and its gradient in the (mean, log variance) coordinates used by the
// optimizer.
ElboGradient elbo_gradient(const VariationalPosterior& q,
                           const ObservationPattern& pattern,
                           const Lexicon& lexicon, const WorldModel& world,
                           double beta,
                           NormalizerBound normalizer = NormalizerBound::kOff);

struct InferenceResult {
  VariationalPosterior posterior;
  double elbo = 0.0;
  std::vector<double> trace;  // ELBO before each step
};

// Adam ascent on (mean, log var) from the prior, with a step learning-rate
// schedule. Throws NumericalError if the ELBO goes non-finite.
InferenceResult infer_posterior(const ObservationPattern& pattern,
                                const Lexicon& lexicon, const WorldModel& world,
                                const InferenceConfig& config);

// E_Q[t_r(x)] at `node`, via expected_sigmoid on the pre-activation moments.
double approx_truth(const VariationalPosterior& q, Node node,
                    const Lexicon& lexicon, PredicateId r);
Eigen::VectorXd approx_truths(const VariationalPosterior& q, Node node,
                              const Lexicon& lexicon);

}  // namespace fds

#endif  // FDS_VARIATIONAL_HPP_
