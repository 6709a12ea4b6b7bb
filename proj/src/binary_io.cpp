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

#include "fds/binary_io.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

namespace fds {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
      return "config";
    case ErrorKind::kData:
      return "data";
    case ErrorKind::kNumerical:
      return "numerical";
  }
  return "unknown";
}

}  // namespace fds

namespace fds::io {

std::vector<std::string> read_header(std::istream& in, std::string_view magic,
                                     std::string_view version) {
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError("missing header, expected '" + std::string(magic) + "'");
  }
  std::istringstream tokens(line);
  std::vector<std::string> fields;
  for (std::string t; tokens >> t;) {
    fields.push_back(t);
  }
  if (fields.size() < 2 || fields[0] != magic || fields[1] != version) {
    throw DataError("magic mismatch: expected '" + std::string(magic) + " " +
                    std::string(version) + "', got '" + line.substr(0, 40) +
                    "'");
  }
  return fields;
}

std::int64_t parse_count(const std::string& token, std::string_view what) {
  std::int64_t value = -1;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end || value < 0) {
    throw DataError("invalid " + std::string(what) + ": '" + token + "'");
  }
  return value;
}

double parse_real(const std::string& token, std::string_view what) {
  try {
    std::size_t used = 0;
    const double value = std::stod(token, &used);
    if (used == token.size()) {
      return value;
    }
  } catch (const std::exception&) {
  }
  throw DataError("invalid " + std::string(what) + ": '" + token + "'");
}

std::string format_real(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void expect_end(std::istream& in, std::string_view what) {
  if (in.peek() != std::char_traits<char>::eof()) {
    throw DataError("trailing bytes after " + std::string(what));
  }
}

AtomicWriter::AtomicWriter(std::filesystem::path path, bool binary)
    : path_(std::move(path)) {
  tmp_path_ = path_;
  tmp_path_ += ".tmp";
  if (path_.has_parent_path()) {
    std::filesystem::create_directories(path_.parent_path());
  }
  out_.open(tmp_path_, binary ? std::ios::binary | std::ios::trunc
                              : std::ios::trunc);
  if (!out_) {
    throw DataError("cannot open for writing: " + tmp_path_.string());
  }
}

AtomicWriter::~AtomicWriter() {
  if (!committed_) {
    out_.close();
    std::error_code ignored;
    std::filesystem::remove(tmp_path_, ignored);
  }
}

void AtomicWriter::commit() {
  out_.flush();
  if (!out_) {
    throw DataError("write failed: " + tmp_path_.string());
  }
  out_.close();
  std::filesystem::rename(tmp_path_, path_);
  committed_ = true;
}

std::ifstream open_input(const std::filesystem::path& path, bool binary) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) {
    throw DataError("cannot open file: " + path.string());
  }
  return in;
}

}  // namespace fds::io
