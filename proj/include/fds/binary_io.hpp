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

#ifndef FDS_BINARY_IO_HPP_
#define FDS_BINARY_IO_HPP_

// Shared plumbing for the model and feature containers: an ASCII header line
// followed by a little-endian IEEE-754 payload.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "fds/error.hpp"

namespace fds::io {

// Splits the first line of `in` into whitespace-separated tokens and checks
// that the first two are `magic` and `version`.
std::vector<std::string> read_header(std::istream& in, std::string_view magic,
                                     std::string_view version);

// Parses a non-negative integer header field.
std::int64_t parse_count(const std::string& token, std::string_view what);
double parse_real(const std::string& token, std::string_view what);

// Shortest text that round-trips a double.
std::string format_real(double value);

template <typename T>
void write_values(std::ostream& out, std::span<const T> values) {
  static_assert(std::is_arithmetic_v<T>);
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size_bytes()));
  } else {
    for (const T& v : values) {
      char bytes[sizeof(T)];
      std::memcpy(bytes, &v, sizeof(T));
      std::reverse(bytes, bytes + sizeof(T));
      out.write(bytes, sizeof(T));
    }
  }
}

// Fills `values` from the stream; a short read is a DataError naming `what`.
template <typename T>
void read_values(std::istream& in, std::span<T> values, std::string_view what) {
  static_assert(std::is_arithmetic_v<T>);
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size_bytes()));
  if (static_cast<std::size_t>(in.gcount()) != values.size_bytes()) {
    throw DataError("truncated payload while reading " + std::string(what));
  }
  if constexpr (std::endian::native != std::endian::little) {
    for (T& v : values) {
      char bytes[sizeof(T)];
      std::memcpy(bytes, &v, sizeof(T));
      std::reverse(bytes, bytes + sizeof(T));
      std::memcpy(&v, bytes, sizeof(T));
    }
  }
}

// Throws DataError if anything but EOF remains in the stream.
void expect_end(std::istream& in, std::string_view what);

// Writes to `<path>.tmp` and renames onto `path` on commit(). An uncommitted
// writer removes its temporary file.
class AtomicWriter {
 public:
  explicit AtomicWriter(std::filesystem::path path, bool binary = true);
  AtomicWriter(const AtomicWriter&) = delete;
  AtomicWriter& operator=(const AtomicWriter&) = delete;
  ~AtomicWriter();

  std::ofstream& stream() { return out_; }
  void commit();

 private:
  std::filesystem::path path_;
  std::filesystem::path tmp_path_;
  std::ofstream out_;
  bool committed_ = false;
};

std::ifstream open_input(const std::filesystem::path& path, bool binary = true);

}  // namespace fds::io

#endif  // FDS_BINARY_IO_HPP_
