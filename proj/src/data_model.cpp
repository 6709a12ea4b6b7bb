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

#include "fds/data_model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <spdlog/spdlog.h>

#include "fds/binary_io.hpp"
#include "fds/error.hpp"

namespace fds {
namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::optional<std::int64_t> parse_index(std::string_view text) {
  std::int64_t value = -1;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || value < 0 || text.empty()) {
    return std::nullopt;
  }
  return value;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
}

}  // namespace

const char* to_string(Node node) {
  switch (node) {
    case Node::kX:
      return "X";
    case Node::kY:
      return "Y";
    case Node::kZ:
      return "Z";
  }
  return "?";
}

Node parse_node(std::string_view text) {
  if (text == "X" || text == "x") return Node::kX;
  if (text == "Y" || text == "y") return Node::kY;
  if (text == "Z" || text == "z") return Node::kZ;
  throw ConfigError("unknown node '" + std::string(text) + "'");
}

const char* to_string(PartOfSpeech pos) {
  return pos == PartOfSpeech::kNoun ? "NOUN" : "EVENT";
}

PartOfSpeech parse_pos(std::string_view text) {
  if (text == "NOUN") return PartOfSpeech::kNoun;
  if (text == "EVENT") return PartOfSpeech::kEvent;
  throw DataError("unknown part of speech '" + std::string(text) + "'");
}

const char* to_string(FilterMode mode) {
  return mode == FilterMode::kStrict ? "strict" : "loose";
}

FilterMode parse_filter_mode(std::string_view text) {
  if (text == "strict" || text == "STRICT") return FilterMode::kStrict;
  if (text == "loose" || text == "LOOSE") return FilterMode::kLoose;
  throw ConfigError("unknown filter mode '" + std::string(text) + "'");
}

Vocabulary::Vocabulary(std::vector<Predicate> predicates)
    : predicates_(std::move(predicates)) {
  lookup_.reserve(predicates_.size());
  for (std::size_t i = 0; i < predicates_.size(); ++i) {
    Predicate& p = predicates_[i];
    p.id = static_cast<PredicateId>(i);
    if (p.lemma.empty()) {
      throw DataError("empty lemma in vocabulary");
    }
    if (p.freq_arg1 < 0 || p.freq_arg2 < 0 || p.freq_event < 0) {
      throw DataError("negative count for lemma '" + p.lemma + "'");
    }
    if (!lookup_.emplace(p.lemma, p.id).second) {
      throw DataError("duplicate lemma '" + p.lemma + "' in vocabulary");
    }
  }
}

const Predicate& Vocabulary::operator[](PredicateId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= predicates_.size()) {
    throw DataError("unknown predicate id " + std::to_string(id));
  }
  return predicates_[static_cast<std::size_t>(id)];
}

std::optional<PredicateId> Vocabulary::find(std::string_view lemma) const {
  auto it = lookup_.find(std::string(lemma));
  if (it == lookup_.end()) {
    return std::nullopt;
  }
  return it->second;
}

PredicateId Vocabulary::id_of(std::string_view lemma) const {
  if (auto id = find(lemma)) {
    return *id;
  }
  throw DataError("unknown lemma '" + std::string(lemma) + "'");
}

std::vector<std::string> Vocabulary::lemmas() const {
  std::vector<std::string> out;
  out.reserve(predicates_.size());
  for (const auto& p : predicates_) {
    out.push_back(p.lemma);
  }
  return out;
}

void FilterPolicy::validate() const {
  if (strict_threshold < 1 || loose_threshold < 1) {
    throw ConfigError("filter thresholds must be >= 1");
  }
}

bool FilterPolicy::keeps(const Predicate& p) const {
  if (mode == FilterMode::kStrict) {
    if (p.pos == PartOfSpeech::kEvent) {
      return p.freq_event >= strict_threshold;
    }
    return p.freq_arg1 >= strict_threshold && p.freq_arg2 >= strict_threshold;
  }
  if (p.pos == PartOfSpeech::kEvent) {
    return p.freq_event >= loose_threshold;
  }
  return std::max(p.freq_arg1, p.freq_arg2) >= loose_threshold;
}

std::string normalize_lemma(std::string_view lemma) {
  std::string out;
  out.reserve(lemma.size());
  bool pending_space = false;
  for (char c : lemma) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back('_');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::vector<RawTriple> read_raw_triples(const std::filesystem::path& path,
                                        std::int64_t* malformed) {
  std::ifstream in = io::open_input(path, /*binary=*/false);
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError("empty triple file: " + path.string());
  }
  strip_cr(line);
  if (line != kTripleHeader) {
    throw DataError("malformed header in " + path.string() + ": expected '" +
                    std::string(kTripleHeader) + "'");
  }
  std::vector<RawTriple> out;
  std::int64_t bad = 0;
  std::int64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) {
      continue;
    }
    const auto fields = split_tabs(line);
    bool ok = fields.size() == 7;
    RawTriple t;
    if (ok) {
      t.image_id = std::string(fields[0]);
      for (int k = 0; k < 3; ++k) {
        t.lemmas[k] = normalize_lemma(fields[1 + k]);
        auto row = parse_index(fields[4 + k]);
        ok = ok && row.has_value() && !t.lemmas[k].empty();
        t.rows[k] = row.value_or(0);
      }
    }
    if (!ok) {
      ++bad;
      spdlog::debug("{}:{}: malformed triple row skipped", path.string(),
                    line_no);
      continue;
    }
    out.push_back(std::move(t));
  }
  if (bad > 0) {
    spdlog::warn("{}: skipped {} malformed rows", path.string(), bad);
  }
  if (malformed != nullptr) {
    *malformed = bad;
  }
  if (out.empty()) {
    throw DataError("no valid triple rows in " + path.string());
  }
  return out;
}

void write_raw_triples(const std::filesystem::path& path,
                       std::span<const RawTriple> triples) {
  io::AtomicWriter writer(path, /*binary=*/false);
  auto& out = writer.stream();
  out << kTripleHeader << '\n';
  for (const auto& t : triples) {
    out << t.image_id << '\t' << t.lemmas[0] << '\t' << t.lemmas[1] << '\t'
        << t.lemmas[2] << '\t' << t.rows[0] << '\t' << t.rows[1] << '\t'
        << t.rows[2] << '\n';
  }
  writer.commit();
}

Vocabulary count_predicates(std::span<const RawTriple> triples) {
  // std::map keeps the resulting vocabulary sorted by lemma, independent of
  // row order.
  std::map<std::string, Predicate> counts;
  for (const auto& t : triples) {
    counts[t.lemmas[index(Node::kX)]].freq_arg1++;
    counts[t.lemmas[index(Node::kY)]].freq_event++;
    counts[t.lemmas[index(Node::kZ)]].freq_arg2++;
  }
  std::vector<Predicate> preds;
  preds.reserve(counts.size());
  for (auto& [lemma, p] : counts) {
    p.lemma = lemma;
    p.pos = p.freq_event > p.freq_arg1 + p.freq_arg2 ? PartOfSpeech::kEvent
                                                      : PartOfSpeech::kNoun;
    preds.push_back(std::move(p));
  }
  return Vocabulary(std::move(preds));
}

Vocabulary build_vocabulary(std::span<const RawTriple> triples,
                            const FilterPolicy& policy) {
  policy.validate();
  if (triples.empty()) {
    throw DataError("cannot build a vocabulary from zero triples");
  }
  Vocabulary counted = count_predicates(triples);
  auto select = [&](const Vocabulary& v) {
    std::vector<Predicate> kept;
    for (const auto& p : v.predicates()) {
      if (policy.keeps(p)) {
        kept.push_back(p);
      }
    }
    return Vocabulary(std::move(kept));
  };
  Vocabulary vocab = select(counted);
  if (policy.iterate_to_fixed_point) {
    while (!vocab.empty()) {
      const TripleSet kept = filter_triples(triples, vocab);
      if (kept.triples.empty()) {
        vocab = Vocabulary();
        break;
      }
      const auto raw = to_raw(kept.triples, vocab);
      Vocabulary next = select(count_predicates(raw));
      if (next == vocab) {
        break;
      }
      vocab = std::move(next);
    }
  }
  if (vocab.empty()) {
    throw DataError("vocabulary is empty after filtering");
  }
  return vocab;
}

TripleSet filter_triples(std::span<const RawTriple> triples,
                         const Vocabulary& vocab) {
  TripleSet out;
  out.triples.reserve(triples.size());
  for (const auto& t : triples) {
    LabeledTriple lt;
    bool known = true;
    for (int k = 0; k < 3 && known; ++k) {
      auto id = vocab.find(t.lemmas[k]);
      known = id.has_value();
      lt.preds[k] = id.value_or(0);
    }
    if (!known) {
      ++out.rejected_unknown;
      continue;
    }
    lt.image_id = t.image_id;
    lt.rows = t.rows;
    out.triples.push_back(std::move(lt));
  }
  return out;
}

TripleSet load_triples(const std::filesystem::path& path,
                       const Vocabulary& vocab) {
  std::int64_t malformed = 0;
  const auto raw = read_raw_triples(path, &malformed);
  TripleSet out = filter_triples(raw, vocab);
  out.rejected_malformed = malformed;
  if (out.rejected_unknown > 0) {
    spdlog::warn("{}: rejected {} rows with out-of-vocabulary lemmas",
                 path.string(), out.rejected_unknown);
  }
  if (out.triples.empty()) {
    throw DataError("no triple in " + path.string() +
                    " resolves in the vocabulary");
  }
  return out;
}

std::vector<RawTriple> to_raw(std::span<const LabeledTriple> triples,
                              const Vocabulary& vocab) {
  std::vector<RawTriple> out;
  out.reserve(triples.size());
  for (const auto& t : triples) {
    RawTriple r;
    r.image_id = t.image_id;
    r.rows = t.rows;
    for (int k = 0; k < 3; ++k) {
      r.lemmas[k] = vocab[t.preds[k]].lemma;
    }
    out.push_back(std::move(r));
  }
  return out;
}

void write_vocabulary(std::ostream& out, const Vocabulary& vocab) {
  for (const auto& p : vocab.predicates()) {
    out << p.lemma << '\t' << to_string(p.pos) << '\t' << p.freq_arg1 << '\t'
        << p.freq_arg2 << '\t' << p.freq_event << '\n';
  }
}

void write_vocabulary(const std::filesystem::path& path,
                      const Vocabulary& vocab) {
  io::AtomicWriter writer(path, /*binary=*/false);
  write_vocabulary(writer.stream(), vocab);
  writer.commit();
}

Vocabulary read_vocabulary(std::istream& in, std::int64_t count) {
  std::vector<Predicate> preds;
  std::string line;
  while ((count < 0 || static_cast<std::int64_t>(preds.size()) < count) &&
         std::getline(in, line)) {
    strip_cr(line);
    if (line.empty()) {
      if (count < 0) continue;
      throw DataError("blank line inside vocabulary block");
    }
    const auto fields = split_tabs(line);
    if (fields.size() != 5) {
      throw DataError("vocabulary row needs 5 fields: '" + line + "'");
    }
    Predicate p;
    p.lemma = std::string(fields[0]);
    p.pos = parse_pos(fields[1]);
    auto a1 = parse_index(fields[2]);
    auto a2 = parse_index(fields[3]);
    auto ev = parse_index(fields[4]);
    if (!a1 || !a2 || !ev) {
      throw DataError("bad counts in vocabulary row: '" + line + "'");
    }
    p.freq_arg1 = *a1;
    p.freq_arg2 = *a2;
    p.freq_event = *ev;
    preds.push_back(std::move(p));
  }
  if (count >= 0 && static_cast<std::int64_t>(preds.size()) != count) {
    throw DataError("vocabulary block truncated");
  }
  return Vocabulary(std::move(preds));
}

Vocabulary read_vocabulary(const std::filesystem::path& path) {
  std::ifstream in = io::open_input(path, /*binary=*/false);
  return read_vocabulary(in);
}

}  // namespace fds
