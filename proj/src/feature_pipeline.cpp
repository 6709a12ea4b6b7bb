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

#include "fds/feature_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "fds/error.hpp"

namespace fds {
namespace {

constexpr std::int64_t kCovarianceBlockRows = 256;

struct FeatureHeader {
  std::int64_t count = 0;
  std::int64_t dim = 0;
};

FeatureHeader read_feature_header(std::istream& in) {
  const auto fields = io::read_header(in, "fdsf", "v1");
  if (fields.size() != 4) {
    throw DataError("fdsf header needs '<count> <dim>'");
  }
  FeatureHeader h{io::parse_count(fields[2], "row count"),
                  io::parse_count(fields[3], "dimension")};
  if (h.count <= 0 || h.dim <= 0) {
    throw DataError("fdsf header must have positive count and dimension");
  }
  return h;
}

void check_payload_size(std::istream& in, const FeatureHeader& h,
                        const std::filesystem::path& path) {
  const auto start = in.tellg();
  in.seekg(0, std::ios::end);
  const auto end = in.tellg();
  in.seekg(start);
  const auto have = static_cast<std::int64_t>(end - start);
  const std::int64_t want = h.count * h.dim * 4;
  if (have < want) {
    throw DataError("truncated payload in " + path.string() + ": header claims " +
                    std::to_string(h.count) + " rows, file holds " +
                    std::to_string(have / (4 * h.dim)));
  }
  if (have > want) {
    throw DataError("trailing bytes after payload in " + path.string());
  }
}

void check_finite(std::span<const float> row, std::int64_t row_index) {
  for (float v : row) {
    if (!std::isfinite(v)) {
      throw DataError("non-finite feature value in row " +
                      std::to_string(row_index));
    }
  }
}

void write_feature_header(std::ostream& out, std::int64_t count,
                          std::int64_t dim) {
  out << "fdsf v1 " << count << ' ' << dim << '\n';
}

void check_pca_dims(const PcaModel& m) {
  if (m.components.rows() != m.output_dim() ||
      m.components.cols() != m.input_dim()) {
    throw DataError("PCA components have the wrong shape");
  }
}

}  // namespace

Eigen::VectorXd FeatureFile::row(std::int64_t i) const {
  if (i < 0 || i >= count()) {
    throw DataError("feature row " + std::to_string(i) + " out of range [0, " +
                    std::to_string(count()) + ")");
  }
  return rows.row(i).transpose().cast<double>();
}

std::span<const float> FeatureFile::row_span(std::int64_t i) const {
  if (i < 0 || i >= count()) {
    throw DataError("feature row " + std::to_string(i) + " out of range");
  }
  return {rows.data() + i * dim(), static_cast<std::size_t>(dim())};
}

FeatureFile read_features(const std::filesystem::path& path) {
  std::ifstream in = io::open_input(path);
  const FeatureHeader h = read_feature_header(in);
  check_payload_size(in, h, path);
  FeatureFile f;
  f.rows.resize(h.count, h.dim);
  io::read_values(in, std::span<float>(f.rows.data(), f.rows.size()),
                  path.string());
  for (std::int64_t i = 0; i < h.count; ++i) {
    check_finite(f.row_span(i), i);
  }
  return f;
}

void write_features(const std::filesystem::path& path, const FeatureFile& f) {
  if (f.count() <= 0 || f.dim() <= 0) {
    throw DataError("refusing to write an empty feature file");
  }
  for (std::int64_t i = 0; i < f.count(); ++i) {
    check_finite(f.row_span(i), i);
  }
  io::AtomicWriter writer(path);
  write_feature_header(writer.stream(), f.count(), f.dim());
  io::write_values(writer.stream(),
                   std::span<const float>(f.rows.data(), f.rows.size()));
  writer.commit();
}

FeatureReader::FeatureReader(const std::filesystem::path& path)
    : path_(path), in_(io::open_input(path)) {
  const FeatureHeader h = read_feature_header(in_);
  count_ = h.count;
  dim_ = h.dim;
  check_payload_size(in_, h, path_);
  payload_start_ = in_.tellg();
}

bool FeatureReader::next(std::span<float> row) {
  if (position_ >= count_) {
    return false;
  }
  if (static_cast<std::int64_t>(row.size()) != dim_) {
    throw DataError("row buffer size does not match feature dimension");
  }
  io::read_values(in_, row, path_.string());
  check_finite(row, position_);
  ++position_;
  return true;
}

void FeatureReader::rewind() {
  in_.clear();
  in_.seekg(payload_start_);
  position_ = 0;
}

FeatureWriter::FeatureWriter(const std::filesystem::path& path,
                             std::int64_t count, std::int64_t dim)
    : writer_(path), count_(count), dim_(dim) {
  if (count <= 0 || dim <= 0) {
    throw DataError("feature file needs positive count and dimension");
  }
  write_feature_header(writer_.stream(), count, dim);
}

void FeatureWriter::append(std::span<const float> row) {
  if (static_cast<std::int64_t>(row.size()) != dim_) {
    throw DataError("appended row has the wrong dimension");
  }
  if (written_ >= count_) {
    throw DataError("more rows appended than declared");
  }
  check_finite(row, written_);
  io::write_values(writer_.stream(), row);
  ++written_;
}

void FeatureWriter::commit() {
  if (written_ != count_) {
    throw DataError("declared " + std::to_string(count_) + " rows, wrote " +
                    std::to_string(written_));
  }
  writer_.commit();
}

RowStream stream_rows(const FeatureFile& features) {
  return [&features](const RowVisitor& visit) {
    for (std::int64_t i = 0; i < features.count(); ++i) {
      visit(features.row_span(i));
    }
  };
}

RowStream stream_rows(const std::filesystem::path& path) {
  return [path](const RowVisitor& visit) {
    FeatureReader reader(path);
    std::vector<float> row(static_cast<std::size_t>(reader.dim()));
    while (reader.next(row)) {
      visit(row);
    }
  };
}

Eigen::VectorXd PcaModel::transform(std::span<const float> raw) const {
  if (static_cast<std::int64_t>(raw.size()) != input_dim()) {
    throw DataError("PCA input has dimension " + std::to_string(raw.size()) +
                    ", model expects " + std::to_string(input_dim()));
  }
  const Eigen::Map<const Eigen::VectorXf> v(raw.data(),
                                            static_cast<Eigen::Index>(raw.size()));
  return transform(Eigen::VectorXd(v.cast<double>()));
}

Eigen::VectorXd PcaModel::transform(const Eigen::VectorXd& raw) const {
  if (raw.size() != input_dim()) {
    throw DataError("PCA input has dimension " + std::to_string(raw.size()) +
                    ", model expects " + std::to_string(input_dim()));
  }
  Eigen::VectorXd projected = components * (raw - mean);
  return scale * projected.cwiseQuotient(eigenvalues.cwiseSqrt());
}

Eigen::VectorXd PcaModel::inverse_transform(const Eigen::VectorXd& pixie) const {
  if (pixie.size() != output_dim()) {
    throw DataError("pixie dimension does not match PCA output dimension");
  }
  const Eigen::VectorXd projected =
      pixie.cwiseProduct(eigenvalues.cwiseSqrt()) / scale;
  return mean + components.transpose() * projected;
}

PcaFit fit_pca(const RowStream& rows, std::int64_t output_dim, double scale) {
  if (output_dim <= 0) {
    throw ConfigError("PCA output dimension must be positive");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ConfigError("PCA scale must be positive and finite");
  }

  // Pass 1: mean.
  std::int64_t n = 0;
  Eigen::VectorXd sum;
  rows([&](std::span<const float> row) {
    if (n == 0) {
      sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(row.size()));
    } else if (static_cast<Eigen::Index>(row.size()) != sum.size()) {
      throw DataError("ragged rows in PCA input");
    }
    for (std::size_t j = 0; j < row.size(); ++j) {
      sum[static_cast<Eigen::Index>(j)] += row[j];
    }
    ++n;
  });
  if (n == 0) {
    throw DataError("PCA input is empty");
  }
  const Eigen::Index d = sum.size();
  if (output_dim > d) {
    throw ConfigError("PCA output dimension " + std::to_string(output_dim) +
                      " exceeds input dimension " + std::to_string(d));
  }
  if (n < output_dim) {
    throw DataError("PCA needs at least output_dim rows, got " +
                    std::to_string(n));
  }
  const Eigen::VectorXd mean = sum / static_cast<double>(n);

  // Pass 2: centered scatter matrix, accumulated in blocks of rows.
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd block(kCovarianceBlockRows, d);
  Eigen::Index filled = 0;
  auto flush = [&] {
    if (filled == 0) return;
    scatter.selfadjointView<Eigen::Lower>().rankUpdate(
        block.topRows(filled).transpose());
    filled = 0;
  };
  rows([&](std::span<const float> row) {
    for (Eigen::Index j = 0; j < d; ++j) {
      block(filled, j) = static_cast<double>(row[static_cast<std::size_t>(j)]) -
                         mean[j];
    }
    if (++filled == kCovarianceBlockRows) {
      flush();
    }
  });
  flush();
  Eigen::MatrixXd cov = scatter.selfadjointView<Eigen::Lower>();
  cov /= static_cast<double>(n);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition of the covariance failed");
  }
  // Eigen returns ascending eigenvalues; take the top output_dim, descending.
  const Eigen::VectorXd& all_values = solver.eigenvalues();
  const double largest = std::max(all_values[d - 1], 0.0);
  const double tolerance = 1e-12 * std::max(largest, 1e-300);

  PcaFit fit;
  fit.sample_count = n;
  PcaModel& model = fit.model;
  model.mean = mean;
  model.scale = scale;
  model.eigenvalues.resize(output_dim);
  model.components.resize(output_dim, d);
  for (std::int64_t k = 0; k < output_dim; ++k) {
    const Eigen::Index src = d - 1 - k;
    const double lambda = all_values[src];
    if (!(lambda > tolerance)) {
      throw NumericalError(
          "covariance is rank-deficient: eigenvalue " + std::to_string(k) +
          " is " + io::format_real(lambda) + " (tolerance " +
          io::format_real(tolerance) + ")");
    }
    model.eigenvalues[k] = lambda;
    Eigen::VectorXd v = solver.eigenvectors().col(src);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) {
      v = -v;
    }
    model.components.row(k) = v.transpose();
  }
  const double total = cov.trace();
  fit.explained_variance_ratio =
      total > 0.0 ? model.eigenvalues.sum() / total : 0.0;
  spdlog::info("PCA {} -> {} on {} rows, explained variance {:.4f}", d,
               output_dim, n, fit.explained_variance_ratio);
  return fit;
}

Eigen::VectorXd transform(const PcaModel& model, std::span<const float> raw) {
  return model.transform(raw);
}

FeatureFile transform_features(const PcaModel& model,
                               const FeatureFile& features) {
  FeatureFile out;
  out.rows.resize(features.count(), model.output_dim());
  for (std::int64_t i = 0; i < features.count(); ++i) {
    out.rows.row(i) = model.transform(features.row_span(i)).cast<float>().transpose();
  }
  return out;
}

void transform_file(const PcaModel& model, const std::filesystem::path& in,
                    const std::filesystem::path& out) {
  FeatureReader reader(in);
  FeatureWriter writer(out, reader.count(), model.output_dim());
  std::vector<float> raw(static_cast<std::size_t>(reader.dim()));
  std::vector<float> pixie(static_cast<std::size_t>(model.output_dim()));
  while (reader.next(raw)) {
    const Eigen::VectorXd p = model.transform(raw);
    for (Eigen::Index j = 0; j < p.size(); ++j) {
      pixie[static_cast<std::size_t>(j)] = static_cast<float>(p[j]);
    }
    writer.append(pixie);
  }
  writer.commit();
}

void write_pca(const std::filesystem::path& path, const PcaModel& model) {
  check_pca_dims(model);
  io::AtomicWriter writer(path);
  auto& out = writer.stream();
  out << "fdsp v1 " << model.input_dim() << ' ' << model.output_dim() << ' '
      << io::format_real(model.scale) << '\n';
  io::write_values(out, std::span<const double>(model.mean.data(),
                                                model.mean.size()));
  io::write_values(out, std::span<const double>(model.eigenvalues.data(),
                                                model.eigenvalues.size()));
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
      comps = model.components;
  io::write_values(out, std::span<const double>(comps.data(), comps.size()));
  writer.commit();
}

PcaModel read_pca(const std::filesystem::path& path) {
  std::ifstream in = io::open_input(path);
  const auto fields = io::read_header(in, "fdsp", "v1");
  if (fields.size() != 5) {
    throw DataError("fdsp header needs '<input_dim> <output_dim> <scale>'");
  }
  const auto input_dim = io::parse_count(fields[2], "input dimension");
  const auto output_dim = io::parse_count(fields[3], "output dimension");
  if (input_dim <= 0 || output_dim <= 0 || output_dim > input_dim) {
    throw DataError("invalid PCA dimensions in " + path.string());
  }
  PcaModel model;
  model.scale = io::parse_real(fields[4], "PCA scale");
  model.mean.resize(input_dim);
  model.eigenvalues.resize(output_dim);
  io::read_values(in, std::span<double>(model.mean.data(), model.mean.size()),
                  "PCA mean");
  io::read_values(in, std::span<double>(model.eigenvalues.data(),
                                        model.eigenvalues.size()),
                  "PCA eigenvalues");
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> comps(
      output_dim, input_dim);
  io::read_values(in, std::span<double>(comps.data(), comps.size()),
                  "PCA components");
  io::expect_end(in, "PCA model");
  model.components = comps;
  return model;
}

}  // namespace fds
