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

#ifndef FDS_DATA_MODEL_HPP_
#define FDS_DATA_MODEL_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fds {

using PredicateId = std::int32_t;

// Situation nodes. X is the ARG1 individual, Y the event, Z the ARG2
// individual; ARG1 links Y to X and ARG2 links Y to Z.
enum class Node : int { kX = 0, kY = 1, kZ = 2 };

inline constexpr std::array<Node, 3> kAllNodes = {Node::kX, Node::kY,
                                                  Node::kZ};

inline int index(Node node) { return static_cast<int>(node); }
const char* to_string(Node node);
Node parse_node(std::string_view text);

enum class PartOfSpeech { kNoun, kEvent };

const char* to_string(PartOfSpeech pos);
PartOfSpeech parse_pos(std::string_view text);

struct Predicate {
  PredicateId id = 0;
  std::string lemma;
  PartOfSpeech pos = PartOfSpeech::kNoun;
  std::int64_t freq_arg1 = 0;
  std::int64_t freq_arg2 = 0;
  std::int64_t freq_event = 0;

  bool operator==(const Predicate&) const = default;
};

// Ordered predicate list with a lemma index. Ids are positions in the list.
class Vocabulary {
 public:
  Vocabulary() = default;
  // Reassigns ids to list positions. Throws DataError on an empty or
  // duplicate lemma or a negative count.
  explicit Vocabulary(std::vector<Predicate> predicates);

  std::size_t size() const { return predicates_.size(); }
  bool empty() const { return predicates_.empty(); }
  const Predicate& operator[](PredicateId id) const;
  const std::vector<Predicate>& predicates() const { return predicates_; }

  std::optional<PredicateId> find(std::string_view lemma) const;
  // Throws DataError for an unknown lemma.
  PredicateId id_of(std::string_view lemma) const;
  bool contains(std::string_view lemma) const { return find(lemma).has_value(); }

  std::vector<std::string> lemmas() const;

  bool operator==(const Vocabulary& other) const {
    return predicates_ == other.predicates_;
  }

 private:
  std::vector<Predicate> predicates_;
  std::unordered_map<std::string, PredicateId> lookup_;
};

// One row of the triple file before vocabulary resolution. Arrays are indexed
// by Node: ARG1, event, ARG2.
struct RawTriple {
  std::string image_id;
  std::array<std::string, 3> lemmas;
  std::array<std::int64_t, 3> rows{};

  bool operator==(const RawTriple&) const = default;
};

struct LabeledTriple {
  std::string image_id;
  std::array<PredicateId, 3> preds{};
  std::array<std::int64_t, 3> rows{};

  PredicateId pred(Node node) const { return preds[index(node)]; }
  std::int64_t row(Node node) const { return rows[index(node)]; }

  bool operator==(const LabeledTriple&) const = default;
};

enum class FilterMode { kStrict, kLoose };

const char* to_string(FilterMode mode);
FilterMode parse_filter_mode(std::string_view text);

struct FilterPolicy {
  FilterMode mode = FilterMode::kStrict;
  std::int64_t strict_threshold = 100;
  std::int64_t loose_threshold = 10;
  // Recount on the surviving triples until the vocabulary stops changing.
  // Off by default: counts come from the raw corpus in a single pass.
  bool iterate_to_fixed_point = false;

  void validate() const;
  bool keeps(const Predicate& p) const;
};

struct TripleSet {
  std::vector<LabeledTriple> triples;
  std::int64_t rejected_unknown = 0;
  std::int64_t rejected_malformed = 0;
};

// Trims, lowercases ASCII, and joins internal whitespace runs with '_'.
std::string normalize_lemma(std::string_view lemma);

inline constexpr std::string_view kTripleHeader = "# fds-triples v1";

// Reads every parse-valid row of a triple file in file order. Malformed rows
// are skipped; `malformed` (if given) receives their count. Throws DataError
// for an unreadable file, a wrong header, or zero valid rows.
std::vector<RawTriple> read_raw_triples(const std::filesystem::path& path,
                                        std::int64_t* malformed = nullptr);
void write_raw_triples(const std::filesystem::path& path,
                       std::span<const RawTriple> triples);

// Per-lemma role counts over the whole input, before any filtering. POS is
// EVENT when a lemma fills the relation slot more often than argument slots.
Vocabulary count_predicates(std::span<const RawTriple> triples);

// Vocabulary of predicates passing `policy`. Counting happens on the raw
// corpus; a triple survives only if all three predicates survive.
// Throws DataError on empty input or empty result.
Vocabulary build_vocabulary(std::span<const RawTriple> triples,
                            const FilterPolicy& policy);

// Keeps exactly the rows whose three lemmas resolve in `vocab`, in order.
TripleSet filter_triples(std::span<const RawTriple> triples,
                         const Vocabulary& vocab);

// read_raw_triples + filter_triples; rows with unknown lemmas are counted and
// logged. Throws DataError if no row survives.
TripleSet load_triples(const std::filesystem::path& path,
                       const Vocabulary& vocab);

// Inverse of filter_triples for writing resolved triples back out.
std::vector<RawTriple> to_raw(std::span<const LabeledTriple> triples,
                              const Vocabulary& vocab);

// Vocabulary TSV: lemma, pos, freq_arg1, freq_arg2, freq_event.
void write_vocabulary(std::ostream& out, const Vocabulary& vocab);
void write_vocabulary(const std::filesystem::path& path,
                      const Vocabulary& vocab);
// Reads `count` lines, or to EOF if count is negative.
Vocabulary read_vocabulary(std::istream& in, std::int64_t count = -1);
Vocabulary read_vocabulary(const std::filesystem::path& path);

}  // namespace fds

#endif  // FDS_DATA_MODEL_HPP_
