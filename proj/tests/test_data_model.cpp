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

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include <doctest.h>

#include "fds/data_model.hpp"
#include "fds/error.hpp"
#include "synthetic_world.hpp"
#include "temp_dir.hpp"

using namespace fds;
using fds::testing::TempDir;

namespace {

RawTriple raw(std::string a, std::string e, std::string b, std::int64_t row = 0) {
  return RawTriple{"img", {std::move(a), std::move(e), std::move(b)},
                   {row, row + 1, row + 2}};
}

Vocabulary vocab_of(std::initializer_list<std::pair<const char*, PartOfSpeech>> items) {
  std::vector<Predicate> preds;
  for (const auto& [lemma, pos] : items) {
    Predicate p;
    p.lemma = lemma;
    p.pos = pos;
    preds.push_back(p);
  }
  return Vocabulary(std::move(preds));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::vector<std::string> sorted_lemmas(const Vocabulary& v) {
  auto l = v.lemmas();
  std::sort(l.begin(), l.end());
  return l;
}

}  // namespace

TEST_SUITE("data_model") {

TEST_CASE("vocabulary assigns ids by position and looks lemmas up both ways") {
  const auto v = vocab_of({{"dog", PartOfSpeech::kNoun},
                           {"chase", PartOfSpeech::kEvent},
                           {"cat", PartOfSpeech::kNoun}});
  REQUIRE(v.size() == 3);
  for (PredicateId id = 0; id < 3; ++id) {
    CHECK(v[id].id == id);
    CHECK(v.id_of(v[id].lemma) == id);
  }
  CHECK_FALSE(v.find("horse").has_value());
  CHECK_THROWS_AS(v.id_of("horse"), DataError);
}

TEST_CASE("vocabulary rejects duplicate and empty lemmas and negative counts") {
  CHECK_THROWS_AS(vocab_of({{"dog", PartOfSpeech::kNoun}, {"dog", PartOfSpeech::kNoun}}),
                  DataError);
  CHECK_THROWS_AS(vocab_of({{"", PartOfSpeech::kNoun}}), DataError);
  Predicate p;
  p.lemma = "x";
  p.freq_arg1 = -1;
  CHECK_THROWS_AS(Vocabulary({p}), DataError);
}

TEST_CASE("normalize_lemma joins whitespace with underscores and lowercases") {
  CHECK(normalize_lemma("  Fire   Hydrant ") == "fire_hydrant");
  CHECK(normalize_lemma("tail") == "tail");
  CHECK(normalize_lemma("a\tb") == "a_b");
}

TEST_CASE("count_predicates counts each slot and marks relations as events") {
  const std::vector<RawTriple> t = {raw("dog", "chase", "cat"),
                                    raw("cat", "chase", "dog"),
                                    raw("dog", "on", "mat")};
  const auto v = count_predicates(t);
  const auto& dog = v[v.id_of("dog")];
  CHECK(dog.freq_arg1 == 2);
  CHECK(dog.freq_arg2 == 1);
  CHECK(dog.freq_event == 0);
  CHECK(dog.pos == PartOfSpeech::kNoun);
  CHECK(v[v.id_of("chase")].pos == PartOfSpeech::kEvent);
  CHECK(v[v.id_of("chase")].freq_event == 2);
  // Sorted by lemma, independent of row order.
  CHECK(v.lemmas() == std::vector<std::string>{"cat", "chase", "dog", "mat", "on"});
}

TEST_CASE("strict policy requires both argument directions") {
  Predicate p;
  p.lemma = "x";
  p.freq_arg1 = 100;
  p.freq_arg2 = 0;
  FilterPolicy strict;
  CHECK_FALSE(strict.keeps(p));
  p.freq_arg2 = 100;
  CHECK(strict.keeps(p));
  FilterPolicy loose;
  loose.mode = FilterMode::kLoose;
  p.freq_arg1 = 10;
  p.freq_arg2 = 0;
  CHECK(loose.keeps(p));
  p.freq_arg1 = 9;
  CHECK_FALSE(loose.keeps(p));
}

TEST_CASE("event predicates use their own frequency") {
  Predicate p;
  p.lemma = "on";
  p.pos = PartOfSpeech::kEvent;
  p.freq_event = 100;
  CHECK(FilterPolicy{}.keeps(p));
  p.freq_event = 99;
  CHECK_FALSE(FilterPolicy{}.keeps(p));
}

TEST_CASE("filter policy validation") {
  FilterPolicy p;
  p.strict_threshold = -1;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("filter_triples keeps in-vocabulary rows in order") {
  const std::vector<RawTriple> t = {raw("dog", "chase", "cat", 0),
                                    raw("dog", "chase", "horse", 3),
                                    raw("cat", "chase", "dog", 6)};
  const auto v = vocab_of({{"cat", PartOfSpeech::kNoun},
                           {"chase", PartOfSpeech::kEvent},
                           {"dog", PartOfSpeech::kNoun}});
  const auto out = filter_triples(t, v);
  REQUIRE(out.triples.size() == 2);
  CHECK(out.rejected_unknown == 1);
  CHECK(out.triples[0].rows[0] == 0);
  CHECK(out.triples[1].rows[0] == 6);
  CHECK(out.triples[1].pred(Node::kZ) == v.id_of("dog"));

  SUBCASE("all in vocabulary is the identity") {
    const std::vector<RawTriple> in = {t[0], t[2]};
    const auto same = filter_triples(in, v);
    CHECK(to_raw(same.triples, v) == in);
  }
}

TEST_CASE("single pass on the raw corpus and strict is a subset of loose") {
  const auto world = fds::testing::make_synthetic_world({.triples = 600});
  auto triples = world.triples;
  // Rare noise lemmas so the two modes differ.
  for (int i = 0; i < 40; ++i) triples.push_back(raw("rare", "chase", "dog"));
  for (int i = 0; i < 40; ++i) triples.push_back(raw("dog", "chase", "odd"));
  FilterPolicy strict;
  strict.strict_threshold = 20;
  FilterPolicy loose;
  loose.mode = FilterMode::kLoose;
  const auto vs = build_vocabulary(triples, strict);
  const auto vl = build_vocabulary(triples, loose);
  for (const auto& lemma : vs.lemmas()) CHECK(vl.contains(lemma));
  CHECK(vl.contains("rare"));
  CHECK_FALSE(vs.contains("rare"));
  CHECK(vs.contains("dog"));

  const auto kept = filter_triples(triples, vs);
  for (const auto& t : kept.triples) {
    for (Node n : kAllNodes) CHECK(static_cast<std::size_t>(t.pred(n)) < vs.size());
  }
  // Recounting on survivors can only shrink the vocabulary.
  const auto again = build_vocabulary(to_raw(kept.triples, vs), strict);
  for (const auto& lemma : again.lemmas()) CHECK(vs.contains(lemma));
}

TEST_CASE("fixed-point filtering is idempotent") {
  std::vector<RawTriple> t;
  // "a" passes on raw counts but half its ARG2 uses pair with "rare".
  for (int i = 0; i < 3; ++i) t.push_back(raw("a", "on", "b"));
  for (int i = 0; i < 3; ++i) t.push_back(raw("b", "on", "a"));
  for (int i = 0; i < 2; ++i) t.push_back(raw("rare", "on", "a"));
  FilterPolicy p;
  p.strict_threshold = 3;
  p.iterate_to_fixed_point = true;
  const auto v = build_vocabulary(t, p);
  const auto kept = filter_triples(t, v);
  const auto v2 = build_vocabulary(to_raw(kept.triples, v), p);
  CHECK(v2 == v);
  CHECK(sorted_lemmas(v) == std::vector<std::string>{"a", "b", "on"});
}

TEST_CASE("empty inputs are data errors") {
  CHECK_THROWS_AS(build_vocabulary({}, FilterPolicy{}), DataError);
  const std::vector<RawTriple> t = {raw("a", "on", "b")};
  CHECK_THROWS_AS(build_vocabulary(t, FilterPolicy{}), DataError);
}

TEST_CASE("load_triples reads file order and counts unknown lemmas") {
  TempDir dir;
  const auto path = dir / "t.tsv";
  write_text(path,
             "# fds-triples v1\n"
             "i1\tdog\tchase\tcat\t0\t1\t2\n"
             "i2\tcat\tchase\tdog\t3\t4\t5\n"
             "i3\tDog\tchase\tcat\t6\t7\t8\n");
  const auto v = vocab_of({{"cat", PartOfSpeech::kNoun},
                           {"chase", PartOfSpeech::kEvent},
                           {"dog", PartOfSpeech::kNoun}});
  const auto set = load_triples(path, v);
  REQUIRE(set.triples.size() == 3);
  CHECK(set.triples[0].image_id == "i1");
  CHECK(set.triples[2].rows[2] == 8);
  CHECK(set.triples[2].pred(Node::kX) == v.id_of("dog"));

  SUBCASE("one unknown row gives zero triples and one rejection") {
    const auto one = dir / "one.tsv";
    write_text(one, "# fds-triples v1\ni1\thorse\tchase\tcat\t0\t1\t2\n");
    CHECK_THROWS_AS(load_triples(one, v), DataError);
    const auto rows = read_raw_triples(one);
    const auto filtered = filter_triples(rows, v);
    CHECK(filtered.triples.empty());
    CHECK(filtered.rejected_unknown == 1);
  }
}

TEST_CASE("malformed rows are skipped and counted") {
  TempDir dir;
  const auto path = dir / "t.tsv";
  write_text(path,
             "# fds-triples v1\n"
             "i1\tdog\tchase\tcat\t0\t1\t2\n"
             "i2\tdog\tchase\tcat\t0\t1\n"
             "i3\tdog\tchase\tcat\t0\t-1\t2\n"
             "i4\tdog\tchase\tcat\t0\tx\t2\n");
  std::int64_t malformed = 0;
  const auto rows = read_raw_triples(path, &malformed);
  CHECK(rows.size() == 1);
  CHECK(malformed == 3);
}

TEST_CASE("a wrong header is rejected") {
  TempDir dir;
  const auto path = dir / "t.tsv";
  write_text(path, "dog\tchase\tcat\n");
  CHECK_THROWS_AS(read_raw_triples(path), DataError);
  CHECK_THROWS_AS(read_raw_triples(dir / "missing.tsv"), DataError);
}

TEST_CASE("triple and vocabulary files round-trip") {
  TempDir dir;
  const std::vector<RawTriple> t = {raw("fire_hydrant", "near", "dog", 0),
                                    raw("dog", "near", "fire_hydrant", 3)};
  write_raw_triples(dir / "t.tsv", t);
  CHECK(read_raw_triples(dir / "t.tsv") == t);

  const auto v = count_predicates(t);
  write_vocabulary(dir / "v.tsv", v);
  CHECK(read_vocabulary(dir / "v.tsv") == v);
}

TEST_CASE("lookup order is stable across runs") {
  const auto world = fds::testing::make_synthetic_world({.triples = 300});
  auto shuffled = world.triples;
  std::mt19937_64 rng(3);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  FilterPolicy loose;
  loose.mode = FilterMode::kLoose;
  CHECK(build_vocabulary(world.triples, loose) == build_vocabulary(shuffled, loose));
}

TEST_CASE("enum text forms round-trip") {
  for (Node n : kAllNodes) CHECK(parse_node(to_string(n)) == n);
  CHECK(parse_pos(to_string(PartOfSpeech::kEvent)) == PartOfSpeech::kEvent);
  CHECK(parse_filter_mode("loose") == FilterMode::kLoose);
  CHECK_THROWS_AS(parse_filter_mode("medium"), ConfigError);
}

}  // TEST_SUITE
