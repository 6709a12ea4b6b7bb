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

#ifndef FDS_WORLD_MODEL_HPP_
#define FDS_WORLD_MODEL_HPP_

#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fds/data_model.hpp"
#include "fds/feature_pipeline.hpp"

namespace fds {

// An ordered pixie triple. The concatenated view is [x | y | z].
struct SituationSample {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd z;

  Eigen::Index n() const { return x.size(); }
  const Eigen::VectorXd& at(Node node) const;
  // Throws DataError unless all three pixies have the same length.
  Eigen::VectorXd concat() const;
};

struct GaussianMarginal {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Joint Gaussian over situations. Immutable once built; the Cholesky factor
// and precision are computed at construction.
//
// With ci_constrained set, sigma's (X,Z) block is replaced by the chain
// completion S_XY S_Y^-1 S_YZ and the precision is assembled from the (X,Y),
// (Y,Z) and Y blocks, so its (X,Z) blocks are exactly zero.
class WorldModel {
 public:
  // Throws NumericalError if sigma (or a clique block) is not positive
  // definite and DataError on shape mismatches.
  WorldModel(Eigen::Index n, Eigen::VectorXd mu, Eigen::MatrixXd sigma,
             bool ci_constrained);

  Eigen::Index n() const { return n_; }
  Eigen::Index dim() const { return 3 * n_; }
  const Eigen::VectorXd& mu() const { return mu_; }
  const Eigen::MatrixXd& sigma() const { return sigma_; }
  const Eigen::MatrixXd& precision() const { return precision_; }
  bool ci_constrained() const { return ci_constrained_; }
  double log_det_sigma() const { return log_det_sigma_; }
  const Eigen::LLT<Eigen::MatrixXd>& cholesky() const { return llt_; }

  Eigen::VectorXd mean(Node node) const;
  Eigen::MatrixXd block(Node row, Node col) const;

 private:
  Eigen::Index n_;
  Eigen::VectorXd mu_;
  Eigen::MatrixXd sigma_;
  Eigen::MatrixXd precision_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double log_det_sigma_ = 0.0;
  bool ci_constrained_;
};

// Replayable stream of concatenated situations.
using SituationVisitor =
    std::function<void(const Eigen::Ref<const Eigen::VectorXd>&)>;
using SituationStream = std::function<void(const SituationVisitor&)>;

SituationStream stream_situations(std::span<const SituationSample> samples);
// Situations read from pixie rows referenced by labeled triples.
SituationStream stream_situations(std::span<const LabeledTriple> triples,
                                  const FeatureFile& pixies);

// Precision of the X-Y-Z chain model whose clique marginals are the
// corresponding blocks of `sigma`:
//   embed(inv(S_XY)) + embed(inv(S_YZ)) - embed(inv(S_Y)).
// Throws NumericalError if a clique block is not positive definite.
Eigen::MatrixXd chain_precision(const Eigen::MatrixXd& sigma, Eigen::Index n);

// Replaces the (X,Z) and (Z,X) blocks of `sigma` with S_XY S_Y^-1 S_YZ.
Eigen::MatrixXd chain_completion(const Eigen::MatrixXd& sigma, Eigen::Index n);

struct WorldFitOptions {
  bool ci_constrained = true;
  // On a Cholesky failure add 1e-6 * trace/dim to the diagonal and retry
  // once; always logged.
  bool ridge_on_failure = true;
};

// Maximum-likelihood fit: sample mean and covariance with denominator N, or
// the chain-structured MLE when constrained. Needs at least 3n+1 samples.
WorldModel fit_world_model(const SituationStream& samples,
                           const WorldFitOptions& options = {});

// Sample mean and covariance (denominator N) in one streaming pass.
struct SampleMoments {
  std::int64_t count = 0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};
SampleMoments sample_moments(const SituationStream& samples);

double log_density(const WorldModel& model, const Eigen::VectorXd& s);
double log_density(const WorldModel& model, const SituationSample& s);

GaussianMarginal marginal(const WorldModel& model, Node node);
// Joint marginal of two nodes, ordered [first | second].
GaussianMarginal marginal(const WorldModel& model, Node first, Node second);

struct DimensionFit {
  int dim = 0;
  double mean = 0.0;
  double sd = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;  // excess kurtosis
  // Half the L1 distance between the histogram mass and the best-fit
  // Gaussian mass, as a fraction in [0, 1]. Tail mass outside the histogram
  // range is included.
  double missing_area = 0.0;
  double hist_lo = 0.0;
  double bin_width = 0.0;
  std::vector<double> density;  // per-bin histogram density
};

struct FitDiagnostics {
  std::vector<DimensionFit> dims;
  double mean_missing_area = 0.0;
  double var_missing_area = 0.0;
};

// Histogram each of the 3n dimensions over mean +/- 5 sd and compare with
// the 1-D maximum-likelihood Gaussian. Needs at least 1000 samples.
FitDiagnostics fit_diagnostics(const WorldModel& model,
                               const SituationStream& samples, int bins = 100);

// TSV: dim, missing_area, skewness, kurtosis.
void write_diagnostics(const std::filesystem::path& path,
                       const FitDiagnostics& diagnostics);

// `fdsw v1 <n> <ci_flag>` then mu and sigma as little-endian float64.
void write_world_model(const std::filesystem::path& path,
                       const WorldModel& model);
WorldModel read_world_model(const std::filesystem::path& path);

}  // namespace fds

#endif  // FDS_WORLD_MODEL_HPP_
