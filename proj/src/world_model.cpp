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

#include "fds/world_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <spdlog/spdlog.h>

#include "fds/binary_io.hpp"
#include "fds/error.hpp"
#include "fds/numeric.hpp"

namespace fds {
namespace {

constexpr Eigen::Index kAccumulateBlockRows = 256;

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Squared-pivot ratio below which a factorization is treated as singular;
// on exactly singular input LLT can succeed on rounding noise.
constexpr double kSingularPivotRatio = 1e-13;

bool positive_definite(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  if (llt.info() != Eigen::Success) return false;
  const Eigen::VectorXd d = llt.matrixLLT().diagonal();
  const double lo = d.minCoeff();
  const double hi = d.maxCoeff();
  return lo > 0.0 && lo * lo > kSingularPivotRatio * hi * hi;
}

Eigen::MatrixXd inverse_spd(const Eigen::MatrixXd& a, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (!positive_definite(llt)) {
    throw NumericalError(std::string(what) + " is not positive definite");
  }
  Eigen::MatrixXd inv =
      llt.solve(Eigen::MatrixXd::Identity(a.rows(), a.cols()));
  return 0.5 * (inv + inv.transpose());
}

double smallest_eigenvalue(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      a, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()[0];
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

const Eigen::VectorXd& SituationSample::at(Node node) const {
  switch (node) {
    case Node::kX:
      return x;
    case Node::kY:
      return y;
    case Node::kZ:
      return z;
  }
  return x;
}

Eigen::VectorXd SituationSample::concat() const {
  if (y.size() != x.size() || z.size() != x.size()) {
    throw DataError("situation pixies have different lengths");
  }
  Eigen::VectorXd s(3 * x.size());
  s << x, y, z;
  return s;
}

WorldModel::WorldModel(Eigen::Index n, Eigen::VectorXd mu,
                       Eigen::MatrixXd sigma, bool ci_constrained)
    : n_(n),
      mu_(std::move(mu)),
      sigma_(std::move(sigma)),
      ci_constrained_(ci_constrained) {
  if (n_ <= 0 || mu_.size() != 3 * n_ || sigma_.rows() != 3 * n_ ||
      sigma_.cols() != 3 * n_) {
    throw DataError("world model parameters do not match n = " +
                    std::to_string(n_));
  }
  if (!mu_.allFinite() || !sigma_.allFinite()) {
    throw NumericalError("world model parameters are not finite");
  }
  const double asym = (sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8 * std::max(1.0, sigma_.cwiseAbs().maxCoeff())) {
    throw NumericalError("world covariance is not symmetric");
  }
  sigma_ = 0.5 * (sigma_ + sigma_.transpose()).eval();
  if (ci_constrained_) {
    sigma_ = chain_completion(sigma_, n_);
  }
  llt_.compute(sigma_);
  if (!positive_definite(llt_)) {
    throw NumericalError("world covariance is not positive definite");
  }
  log_det_sigma_ =
      2.0 * llt_.matrixL().toDenseMatrix().diagonal().array().log().sum();
  if (ci_constrained_) {
    precision_ = chain_precision(sigma_, n_);
  } else {
    precision_ = llt_.solve(Eigen::MatrixXd::Identity(3 * n_, 3 * n_));
    precision_ = 0.5 * (precision_ + precision_.transpose()).eval();
  }
}

Eigen::VectorXd WorldModel::mean(Node node) const {
  return mu_.segment(index(node) * n_, n_);
}

Eigen::MatrixXd WorldModel::block(Node row, Node col) const {
  return sigma_.block(index(row) * n_, index(col) * n_, n_, n_);
}

SituationStream stream_situations(std::span<const SituationSample> samples) {
  return [samples](const SituationVisitor& visit) {
    for (const auto& s : samples) {
      visit(s.concat());
    }
  };
}

SituationStream stream_situations(std::span<const LabeledTriple> triples,
                                  const FeatureFile& pixies) {
  return [triples, &pixies](const SituationVisitor& visit) {
    const Eigen::Index n = pixies.dim();
    Eigen::VectorXd s(3 * n);
    for (const auto& t : triples) {
      for (Node node : kAllNodes) {
        const auto row = pixies.row_span(t.row(node));
        for (Eigen::Index j = 0; j < n; ++j) {
          s[index(node) * n + j] = row[static_cast<std::size_t>(j)];
        }
      }
      visit(s);
    }
  };
}

Eigen::MatrixXd chain_precision(const Eigen::MatrixXd& sigma, Eigen::Index n) {
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  k.topLeftCorner(2 * n, 2 * n) +=
      inverse_spd(sigma.topLeftCorner(2 * n, 2 * n), "(X,Y) clique covariance");
  k.bottomRightCorner(2 * n, 2 * n) += inverse_spd(
      sigma.bottomRightCorner(2 * n, 2 * n), "(Y,Z) clique covariance");
  k.block(n, n, n, n) -= inverse_spd(sigma.block(n, n, n, n), "Y covariance");
  return k;
}

Eigen::MatrixXd chain_completion(const Eigen::MatrixXd& sigma, Eigen::Index n) {
  Eigen::LLT<Eigen::MatrixXd> llt_y(sigma.block(n, n, n, n));
  if (!positive_definite(llt_y)) {
    throw NumericalError("Y covariance is not positive definite");
  }
  Eigen::MatrixXd out = sigma;
  const Eigen::MatrixXd xz =
      sigma.block(0, n, n, n) * llt_y.solve(sigma.block(n, 2 * n, n, n));
  out.block(0, 2 * n, n, n) = xz;
  out.block(2 * n, 0, n, n) = xz.transpose();
  return out;
}

SampleMoments sample_moments(const SituationStream& samples) {
  SampleMoments m;
  Eigen::Index d = 0;
  Eigen::VectorXd shift;
  Eigen::VectorXd sum;
  Eigen::MatrixXd scatter;
  Eigen::MatrixXd block;
  Eigen::Index filled = 0;
  auto flush = [&] {
    if (filled == 0) return;
    const auto rows = block.topRows(filled);
    sum += rows.colwise().sum().transpose();
    scatter.selfadjointView<Eigen::Lower>().rankUpdate(rows.transpose());
    filled = 0;
  };
  samples([&](const Eigen::Ref<const Eigen::VectorXd>& s) {
    if (m.count == 0) {
      d = s.size();
      // Accumulating around the first sample keeps the scatter matrix well
      // conditioned when the mean is far from zero.
      shift = s;
      sum = Eigen::VectorXd::Zero(d);
      scatter = Eigen::MatrixXd::Zero(d, d);
      block.resize(kAccumulateBlockRows, d);
    } else if (s.size() != d) {
      throw DataError("situations have inconsistent dimensions");
    }
    if (!s.allFinite()) {
      throw DataError("non-finite situation at index " +
                      std::to_string(m.count));
    }
    block.row(filled) = (s - shift).transpose();
    if (++filled == kAccumulateBlockRows) {
      flush();
    }
    ++m.count;
  });
  if (m.count == 0) {
    throw DataError("no situations to fit");
  }
  flush();
  const double inv_n = 1.0 / static_cast<double>(m.count);
  const Eigen::VectorXd centered_mean = sum * inv_n;
  m.mean = shift + centered_mean;
  Eigen::MatrixXd full = scatter.selfadjointView<Eigen::Lower>();
  m.cov = full * inv_n - centered_mean * centered_mean.transpose();
  return m;
}

WorldModel fit_world_model(const SituationStream& samples,
                           const WorldFitOptions& options) {
  const SampleMoments m = sample_moments(samples);
  const Eigen::Index d = m.mean.size();
  if (d % 3 != 0) {
    throw DataError("situation dimension " + std::to_string(d) +
                    " is not a multiple of 3");
  }
  const Eigen::Index n = d / 3;
  if (m.count < d + 1) {
    throw DataError("world model needs at least 3n+1 = " +
                    std::to_string(d + 1) + " samples, got " +
                    std::to_string(m.count));
  }
  auto build = [&](const Eigen::MatrixXd& cov) {
    Eigen::MatrixXd sigma =
        options.ci_constrained ? chain_completion(cov, n) : cov;
    return WorldModel(n, m.mean, std::move(sigma), options.ci_constrained);
  };
  try {
    return build(m.cov);
  } catch (const NumericalError& e) {
    const double lambda_min = smallest_eigenvalue(m.cov);
    const std::string detail = std::string(e.what()) +
                               "; smallest covariance eigenvalue " +
                               io::format_real(lambda_min);
    const double ridge = 1e-6 * m.cov.trace() / static_cast<double>(d);
    if (!options.ridge_on_failure || !(ridge > 0.0)) {
      throw NumericalError("singular covariance: " + detail);
    }
    spdlog::warn("{}; adding ridge {} to the covariance diagonal", detail,
                 ridge);
    Eigen::MatrixXd ridged = m.cov;
    ridged.diagonal().array() += ridge;
    try {
      return build(ridged);
    } catch (const NumericalError& again) {
      throw NumericalError("singular covariance even after ridge: " +
                           std::string(again.what()));
    }
  }
}

double log_density(const WorldModel& model, const Eigen::VectorXd& s) {
  if (s.size() != model.dim()) {
    throw DataError("situation has dimension " + std::to_string(s.size()) +
                    ", model expects " + std::to_string(model.dim()));
  }
  const Eigen::VectorXd white =
      model.cholesky().matrixL().solve(s - model.mu());
  return -0.5 * (static_cast<double>(model.dim()) * kLog2Pi +
                 model.log_det_sigma() + white.squaredNorm());
}

double log_density(const WorldModel& model, const SituationSample& s) {
  return log_density(model, s.concat());
}

GaussianMarginal marginal(const WorldModel& model, Node node) {
  return {model.mean(node), model.block(node, node)};
}

GaussianMarginal marginal(const WorldModel& model, Node first, Node second) {
  const Eigen::Index n = model.n();
  GaussianMarginal g;
  g.mean.resize(2 * n);
  g.mean << model.mean(first), model.mean(second);
  g.cov.resize(2 * n, 2 * n);
  g.cov << model.block(first, first), model.block(first, second),
      model.block(second, first), model.block(second, second);
  return g;
}

FitDiagnostics fit_diagnostics(const WorldModel& model,
                               const SituationStream& samples, int bins) {
  if (bins < 1) {
    throw ConfigError("histogram needs at least one bin");
  }
  const Eigen::Index d = model.dim();

  // Pass 1: Welford mean and second moment.
  std::int64_t count = 0;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(d);
  samples([&](const Eigen::Ref<const Eigen::VectorXd>& s) {
    if (s.size() != d) {
      throw DataError("situation dimension does not match the world model");
    }
    ++count;
    const Eigen::VectorXd delta = s - mean;
    mean += delta / static_cast<double>(count);
    m2.array() += delta.array() * (s - mean).array();
  });
  if (count < 1000) {
    throw DataError("fit diagnostics need at least 1000 samples, got " +
                    std::to_string(count));
  }
  const Eigen::VectorXd sd = (m2 / static_cast<double>(count)).cwiseSqrt();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (!(sd[j] > 0.0)) {
      throw DataError("dimension " + std::to_string(j) + " is constant");
    }
  }

  // Pass 2: higher moments and histograms over mean +/- 5 sd.
  const Eigen::VectorXd lo = mean - 5.0 * sd;
  const Eigen::VectorXd width = 10.0 * sd / static_cast<double>(bins);
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(d, bins);
  Eigen::VectorXd below = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd above = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd m3 = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd m4 = Eigen::VectorXd::Zero(d);
  samples([&](const Eigen::Ref<const Eigen::VectorXd>& s) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double c = s[j] - mean[j];
      const double c2 = c * c;
      m3[j] += c2 * c;
      m4[j] += c2 * c2;
      const double pos = (s[j] - lo[j]) / width[j];
      if (pos < 0.0) {
        below[j] += 1.0;
      } else if (pos >= bins) {
        above[j] += 1.0;
      } else {
        counts(j, static_cast<Eigen::Index>(pos)) += 1.0;
      }
    }
  });

  const double total = static_cast<double>(count);
  FitDiagnostics out;
  out.dims.reserve(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) {
    DimensionFit f;
    f.dim = static_cast<int>(j);
    f.mean = mean[j];
    f.sd = sd[j];
    const double var = sd[j] * sd[j];
    f.skewness = (m3[j] / total) / (var * sd[j]);
    f.kurtosis = (m4[j] / total) / (var * var) - 3.0;
    f.hist_lo = lo[j];
    f.bin_width = width[j];
    f.density.resize(static_cast<std::size_t>(bins));
    double l1 = std::abs(below[j] / total - normal_cdf(-5.0)) +
                std::abs(above[j] / total - normal_cdf(-5.0));
    for (int b = 0; b < bins; ++b) {
      const double z0 = -5.0 + 10.0 * b / bins;
      const double z1 = -5.0 + 10.0 * (b + 1) / bins;
      const double gaussian_mass = normal_cdf(z1) - normal_cdf(z0);
      const double hist_mass = counts(j, b) / total;
      f.density[static_cast<std::size_t>(b)] = hist_mass / width[j];
      l1 += std::abs(hist_mass - gaussian_mass);
    }
    f.missing_area = 0.5 * l1;
    out.dims.push_back(std::move(f));
  }
  double acc = 0.0;
  for (const auto& f : out.dims) acc += f.missing_area;
  out.mean_missing_area = acc / static_cast<double>(d);
  double sq = 0.0;
  for (const auto& f : out.dims) {
    sq += (f.missing_area - out.mean_missing_area) *
          (f.missing_area - out.mean_missing_area);
  }
  out.var_missing_area = sq / static_cast<double>(d);
  return out;
}

void write_diagnostics(const std::filesystem::path& path,
                       const FitDiagnostics& diagnostics) {
  io::AtomicWriter writer(path, /*binary=*/false);
  auto& out = writer.stream();
  out << "dim\tmissing_area\tskewness\tkurtosis\n";
  for (const auto& f : diagnostics.dims) {
    out << f.dim << '\t' << io::format_real(f.missing_area) << '\t'
        << io::format_real(f.skewness) << '\t' << io::format_real(f.kurtosis)
        << '\n';
  }
  writer.commit();
}

void write_world_model(const std::filesystem::path& path,
                       const WorldModel& model) {
  io::AtomicWriter writer(path);
  auto& out = writer.stream();
  out << "fdsw v1 " << model.n() << ' ' << (model.ci_constrained() ? 1 : 0)
      << '\n';
  io::write_values(out,
                   std::span<const double>(model.mu().data(), model.mu().size()));
  const RowMajorMatrix sigma = model.sigma();
  io::write_values(out, std::span<const double>(sigma.data(), sigma.size()));
  writer.commit();
}

WorldModel read_world_model(const std::filesystem::path& path) {
  std::ifstream in = io::open_input(path);
  const auto fields = io::read_header(in, "fdsw", "v1");
  if (fields.size() != 4) {
    throw DataError("fdsw header needs '<n> <ci_flag>'");
  }
  const auto n = io::parse_count(fields[2], "pixie dimension");
  const auto flag = io::parse_count(fields[3], "ci flag");
  if (n <= 0 || flag > 1) {
    throw DataError("invalid fdsw header in " + path.string());
  }
  Eigen::VectorXd mu(3 * n);
  io::read_values(in, std::span<double>(mu.data(), mu.size()), "world mean");
  RowMajorMatrix sigma(3 * n, 3 * n);
  io::read_values(in, std::span<double>(sigma.data(), sigma.size()),
                  "world covariance");
  io::expect_end(in, "world model");
  return WorldModel(n, std::move(mu), Eigen::MatrixXd(sigma), flag == 1);
}

}  // namespace fds
