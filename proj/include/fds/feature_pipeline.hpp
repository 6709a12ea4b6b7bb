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

#ifndef FDS_FEATURE_PIPELINE_HPP_
#define FDS_FEATURE_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <span>

#include <Eigen/Dense>

#include "fds/binary_io.hpp"

namespace fds {

using FloatMatrix =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Dense row-major feature matrix, one row per individual. Raw CNN features
// and PCA-whitened pixies share this container.
struct FeatureFile {
  FloatMatrix rows;

  std::int64_t count() const { return rows.rows(); }
  std::int64_t dim() const { return rows.cols(); }
  // Row `i` widened to double. Throws DataError when out of range.
  Eigen::VectorXd row(std::int64_t i) const;
  std::span<const float> row_span(std::int64_t i) const;
};

// `fdsf v1 <count> <dim>` followed by count*dim little-endian float32.
FeatureFile read_features(const std::filesystem::path& path);
void write_features(const std::filesystem::path& path, const FeatureFile& f);

// Sequential row reader over an fdsf file. Holds one row in memory.
class FeatureReader {
 public:
  explicit FeatureReader(const std::filesystem::path& path);

  std::int64_t count() const { return count_; }
  std::int64_t dim() const { return dim_; }

  // Copies the next row into `row` (size dim). Returns false at end.
  bool next(std::span<float> row);
  void rewind();

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::streampos payload_start_;
  std::int64_t count_ = 0;
  std::int64_t dim_ = 0;
  std::int64_t position_ = 0;
};

// Streaming counterpart of write_features; the row count is fixed up front.
class FeatureWriter {
 public:
  FeatureWriter(const std::filesystem::path& path, std::int64_t count,
                std::int64_t dim);

  void append(std::span<const float> row);
  // Throws DataError unless exactly `count` rows were appended.
  void commit();

 private:
  io::AtomicWriter writer_;
  std::int64_t count_;
  std::int64_t dim_;
  std::int64_t written_ = 0;
};

// A replayable sequence of rows. Every invocation must visit the same rows in
// the same order; fit_pca walks the stream twice.
using RowVisitor = std::function<void(std::span<const float>)>;
using RowStream = std::function<void(const RowVisitor&)>;

RowStream stream_rows(const FeatureFile& features);
RowStream stream_rows(const std::filesystem::path& path);

struct PcaModel {
  Eigen::VectorXd mean;          // input_dim
  Eigen::MatrixXd components;    // output_dim x input_dim, orthonormal rows
  Eigen::VectorXd eigenvalues;   // output_dim, descending
  double scale = 1.15;

  std::int64_t input_dim() const { return mean.size(); }
  std::int64_t output_dim() const { return eigenvalues.size(); }

  // scale * diag(eigenvalues)^(-1/2) * components * (raw - mean).
  // Throws DataError on a dimension mismatch.
  Eigen::VectorXd transform(std::span<const float> raw) const;
  Eigen::VectorXd transform(const Eigen::VectorXd& raw) const;
  // Maps a pixie back into the input space (exact when output == input dim).
  Eigen::VectorXd inverse_transform(const Eigen::VectorXd& pixie) const;
};

struct PcaFit {
  PcaModel model;
  double explained_variance_ratio = 0.0;
  std::int64_t sample_count = 0;
};

// Two streaming passes (mean, then covariance with denominator N) and a
// dense symmetric eigendecomposition. Components are sign-normalized so their
// largest-magnitude entry is positive. Throws NumericalError if a retained
// eigenvalue is not positive and ConfigError for impossible dimensions.
PcaFit fit_pca(const RowStream& rows, std::int64_t output_dim,
               double scale = 1.15);

Eigen::VectorXd transform(const PcaModel& model, std::span<const float> raw);

FeatureFile transform_features(const PcaModel& model,
                               const FeatureFile& features);
// Streams `in` through the model into a new fdsf file.
void transform_file(const PcaModel& model, const std::filesystem::path& in,
                    const std::filesystem::path& out);

// `fdsp v1 <input_dim> <output_dim> <scale>` then mean, eigenvalues and
// components as little-endian float64.
void write_pca(const std::filesystem::path& path, const PcaModel& model);
PcaModel read_pca(const std::filesystem::path& path);

}  // namespace fds

#endif  // FDS_FEATURE_PIPELINE_HPP_
