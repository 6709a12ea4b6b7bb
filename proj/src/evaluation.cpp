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

#include "fds/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>
#include <tuple>

#include <spdlog/spdlog.h>

#include "fds/binary_io.hpp"
#include "fds/error.hpp"
#include "fds/ranking.hpp"

namespace fds {
namespace {

// Runs fn(i) for i in [0, count) on up to `jobs` threads. Results must be
// written by index so the outcome does not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(count);
          return;
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find('\t', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  for (auto& f : out) {
    while (!f.empty() && (f.back() == '\r' || f.back() == ' ')) f.pop_back();
  }
  return out;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

// Drops a trailing POS marker such as "-n" or "_N".
std::string dataset_lemma(std::string_view token) {
  if (token.size() > 2 && (token[token.size() - 2] == '-' ||
                           token[token.size() - 2] == '_') &&
      std::isalpha(static_cast<unsigned char>(token.back()))) {
    token.remove_suffix(2);
  }
  return normalize_lemma(token);
}

double parse_score(const std::string& text, const std::filesystem::path& path,
                   std::size_t line_no) {
  try {
    return io::parse_real(text, "score");
  } catch (const Error&) {
    throw DataError(path.string() + ":" + std::to_string(line_no) +
                    ": bad score '" + text + "'");
  }
}

std::size_t column(const std::vector<std::string>& header,
                   std::string_view name, const std::filesystem::path& path) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw DataError(path.string() + ": header has no column '" +
                  std::string(name) + "'");
}

void require_items(std::size_t count, const std::filesystem::path& path) {
  if (count == 0) throw DataError(path.string() + ": no items");
}

bool covered(std::string_view lemma, const Vocabulary& vocab, FilterMode mode) {
  const auto id = vocab.find(lemma);
  if (!id) return false;
  return mode == FilterMode::kLoose || vocab[*id].pos == PartOfSpeech::kNoun;
}

// Distinct ids in ascending order.
std::vector<PredicateId> distinct(std::vector<PredicateId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::vector<VariationalPosterior> infer_all(
    const std::vector<ObservationPattern>& patterns, const EvalModels& models,
    const EvalConfig& config) {
  std::vector<VariationalPosterior> out(patterns.size());
  parallel_for(patterns.size(), config.jobs, [&](std::size_t i) {
    out[i] = infer_posterior(patterns[i], models.lexicon, models.world,
                             config.inference)
                 .posterior;
  });
  return out;
}

std::optional<double> guarded(double (*fn)(std::span<const double>,
                                           std::span<const double>),
                              std::span<const double> a,
                              std::span<const double> b) {
  try {
    return fn(a, b);
  } catch (const DataError&) {
    return std::nullopt;
  }
}

}  // namespace

// ---------------------------------------------------------------------------

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw DataError("correlation inputs differ in length: " +
                    std::to_string(x.size()) + " vs " +
                    std::to_string(y.size()));
  }
  if (x.size() < 2) throw DataError("correlation needs at least two items");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw DataError("correlation undefined for a constant input");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 3 || y.size() < 3) {
    throw DataError("Spearman correlation needs at least three items");
  }
  if (x.size() != y.size()) {
    throw DataError("correlation inputs differ in length: " +
                    std::to_string(x.size()) + " vs " +
                    std::to_string(y.size()));
  }
  const auto rx = midranks(x);
  const auto ry = midranks(y);
  return pearson(rx, ry);
}

double average_precision(const std::vector<bool>& relevance) {
  double hits = 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < relevance.size(); ++k) {
    if (!relevance[k]) continue;
    hits += 1.0;
    sum += hits / static_cast<double>(k + 1);
  }
  return hits == 0.0 ? 0.0 : sum / hits;
}

double mean_average_precision(const std::vector<std::vector<bool>>& rankings) {
  if (rankings.empty()) throw DataError("MAP over zero rankings");
  double sum = 0.0;
  for (const auto& r : rankings) sum += average_precision(r);
  return sum / static_cast<double>(rankings.size());
}

double descending_midrank(std::span<const double> truths, std::size_t target) {
  if (target >= truths.size()) {
    throw DataError("rank target " + std::to_string(target) +
                    " outside candidate list of " +
                    std::to_string(truths.size()));
  }
  const double t = truths[target];
  double greater = 0.0, equal = 0.0;
  for (double v : truths) {
    if (v > t) greater += 1.0;
    else if (v == t) equal += 1.0;
  }
  return 1.0 + greater + (equal - 1.0) / 2.0;
}

double rank_of(PredicateId target, std::span<const PredicateId> candidates,
               const VariationalPosterior& q, Node node,
               const Lexicon& lexicon) {
  const auto it = std::find(candidates.begin(), candidates.end(), target);
  if (it == candidates.end()) {
    throw DataError("rank target " + std::to_string(target) +
                    " is not among the candidates");
  }
  std::vector<double> truths(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    truths[i] = approx_truth(q, node, lexicon, candidates[i]);
  }
  return descending_midrank(
      truths, static_cast<std::size_t>(it - candidates.begin()));
}

// ---------------------------------------------------------------------------

std::vector<WordPairItem> load_men(const std::filesystem::path& path) {
  auto in = io::open_input(path, false);
  std::vector<WordPairItem> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto tok = split_ws(line);
    if (tok.size() != 3) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected 3 fields, got " + std::to_string(tok.size()));
    }
    items.push_back({dataset_lemma(tok[0]), dataset_lemma(tok[1]),
                     parse_score(tok[2], path, line_no)});
  }
  require_items(items.size(), path);
  return items;
}

std::vector<WordPairItem> load_simlex(const std::filesystem::path& path) {
  auto in = io::open_input(path, false);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (!blank(line)) header = split_tabs(line);
  }
  if (header.empty()) throw DataError(path.string() + ": empty file");
  const auto c1 = column(header, "word1", path);
  const auto c2 = column(header, "word2", path);
  const auto cs = column(header, "SimLex999", path);
  const auto need = std::max({c1, c2, cs}) + 1;
  std::vector<WordPairItem> items;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto f = split_tabs(line);
    if (f.size() < need) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected at least " + std::to_string(need) +
                      " fields, got " + std::to_string(f.size()));
    }
    items.push_back({dataset_lemma(f[c1]), dataset_lemma(f[c2]),
                     parse_score(f[cs], path, line_no)});
  }
  require_items(items.size(), path);
  return items;
}

std::vector<TriplePairItem> load_gs2011(const std::filesystem::path& path) {
  auto in = io::open_input(path, false);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (!blank(line)) header = split_ws(line);
  }
  if (header.empty()) throw DataError(path.string() + ": empty file");
  const auto cv = column(header, "verb", path);
  const auto cs = column(header, "subject", path);
  const auto co = column(header, "object", path);
  const auto cl = column(header, "landmark", path);
  const auto ci = column(header, "input", path);
  const auto need = std::max({cv, cs, co, cl, ci}) + 1;
  std::vector<TriplePairItem> items;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto f = split_ws(line);
    if (f.size() < need) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected at least " + std::to_string(need) +
                      " fields, got " + std::to_string(f.size()));
    }
    items.push_back({dataset_lemma(f[cs]), dataset_lemma(f[cv]),
                     dataset_lemma(f[co]), dataset_lemma(f[cl]),
                     parse_score(f[ci], path, line_no)});
  }
  require_items(items.size(), path);
  return items;
}

std::vector<RelpronItem> load_relpron(const std::filesystem::path& path) {
  auto in = io::open_input(path, false);
  struct Row {
    std::string term;
    RelpronProperty prop;
  };
  std::vector<Row> rows;
  std::vector<std::string> terms;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto f = split_ws(line);
    const auto bad = [&](const std::string& why) {
      return DataError(path.string() + ":" + std::to_string(line_no) + ": " +
                       why);
    };
    if (f.size() != 6) {
      throw bad("expected 6 fields, got " + std::to_string(f.size()));
    }
    if (f[1].empty() || f[1].back() != ':') throw bad("term must end with ':'");
    if (f[3] != "that") throw bad("expected 'that', got '" + f[3] + "'");
    Row row;
    row.term = dataset_lemma(std::string_view(f[1]).substr(0, f[1].size() - 1));
    row.prop.head_noun = dataset_lemma(f[2]);
    if (f[0] == "SBJ") {
      row.prop.clause = ClauseType::kSubject;
      row.prop.event = dataset_lemma(f[4]);
      row.prop.other_noun = dataset_lemma(f[5]);
    } else if (f[0] == "OBJ") {
      row.prop.clause = ClauseType::kObject;
      row.prop.other_noun = dataset_lemma(f[4]);
      row.prop.event = dataset_lemma(f[5]);
    } else {
      throw bad("clause type must be SBJ or OBJ, got '" + f[0] + "'");
    }
    if (std::find(terms.begin(), terms.end(), row.term) == terms.end()) {
      terms.push_back(row.term);
    }
    rows.push_back(std::move(row));
  }
  require_items(rows.size(), path);
  std::vector<RelpronItem> items;
  items.reserve(terms.size());
  for (const auto& term : terms) {
    RelpronItem item{term, {}};
    item.properties.reserve(rows.size());
    for (const auto& row : rows) {
      item.properties.push_back(row.prop);
      item.properties.back().relevant = row.term == term;
    }
    items.push_back(std::move(item));
  }
  return items;
}

// ---------------------------------------------------------------------------

FilteredDataset<WordPairItem> filter_dataset(std::span<const WordPairItem> items,
                                             const Vocabulary& vocab,
                                             FilterMode mode) {
  FilteredDataset<WordPairItem> out;
  out.total = items.size();
  for (const auto& item : items) {
    if (covered(item.w1, vocab, mode) && covered(item.w2, vocab, mode)) {
      out.items.push_back(item);
    }
  }
  return out;
}

FilteredDataset<TriplePairItem> filter_dataset(
    std::span<const TriplePairItem> items, const Vocabulary& vocab,
    FilterMode mode) {
  FilteredDataset<TriplePairItem> out;
  out.total = items.size();
  for (const auto& item : items) {
    if (covered(item.subject, vocab, mode) && covered(item.verb1, vocab, mode) &&
        covered(item.object, vocab, mode) && covered(item.verb2, vocab, mode)) {
      out.items.push_back(item);
    }
  }
  return out;
}

FilteredDataset<RelpronItem> filter_dataset(std::span<const RelpronItem> items,
                                            const Vocabulary& vocab,
                                            FilterMode mode) {
  FilteredDataset<RelpronItem> out;
  out.total = items.size();
  for (const auto& item : items) {
    if (!covered(item.term, vocab, mode)) continue;
    RelpronItem kept{item.term, {}};
    bool any_relevant = false;
    for (const auto& p : item.properties) {
      if (covered(p.head_noun, vocab, mode) && covered(p.event, vocab, mode) &&
          covered(p.other_noun, vocab, mode)) {
        kept.properties.push_back(p);
        any_relevant = any_relevant || p.relevant;
      }
    }
    if (any_relevant) out.items.push_back(std::move(kept));
  }
  return out;
}

// ---------------------------------------------------------------------------

EvalResult eval_word_pairs(std::span<const WordPairItem> items,
                           const EvalModels& models, const EvalConfig& config) {
  if (items.empty()) throw DataError("word-pair evaluation on zero items");
  const auto& vocab = models.lexicon.vocab();
  std::vector<PredicateId> firsts, seconds;
  for (const auto& item : items) {
    firsts.push_back(vocab.id_of(item.w1));
    seconds.push_back(vocab.id_of(item.w2));
  }
  const auto queries = distinct(firsts);
  const auto candidates = distinct(seconds);

  std::vector<ObservationPattern> patterns(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    patterns[i].set(config.noun_node, queries[i]);
  }
  const auto posteriors = infer_all(patterns, models, config);

  EvalResult result;
  result.n_items = items.size();
  result.scores.resize(items.size());
  parallel_for(items.size(), config.jobs, [&](std::size_t i) {
    const auto q = std::lower_bound(queries.begin(), queries.end(), firsts[i]) -
                   queries.begin();
    result.scores[i] = -rank_of(seconds[i], candidates,
                                posteriors[static_cast<std::size_t>(q)],
                                config.noun_node, models.lexicon);
  });
  for (const auto& item : items) result.gold.push_back(item.gold);
  result.value = spearman(result.scores, result.gold);
  return result;
}

EvalResult eval_word_pairs_with_oov_median(std::span<const WordPairItem> items,
                                           FilterMode mode,
                                           const EvalModels& models,
                                           const EvalConfig& config) {
  if (items.empty()) throw DataError("word-pair evaluation on zero items");
  const auto& vocab = models.lexicon.vocab();
  std::vector<std::size_t> covered_index;
  std::vector<WordPairItem> covered_items;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (covered(items[i].w1, vocab, mode) && covered(items[i].w2, vocab, mode)) {
      covered_index.push_back(i);
      covered_items.push_back(items[i]);
    }
  }
  if (covered_items.empty()) {
    throw DataError("no word pair is covered by the vocabulary");
  }
  const auto inner = eval_word_pairs(covered_items, models, config);
  auto sorted = inner.scores;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  const double median =
      m % 2 == 1 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);

  EvalResult result;
  result.n_items = items.size();
  result.scores.assign(items.size(), median);
  for (std::size_t k = 0; k < covered_index.size(); ++k) {
    result.scores[covered_index[k]] = inner.scores[k];
  }
  for (const auto& item : items) result.gold.push_back(item.gold);
  result.value = spearman(result.scores, result.gold);
  return result;
}

EvalResult eval_triple_pairs(std::span<const TriplePairItem> items,
                             const EvalModels& models, const EvalConfig& config) {
  if (items.empty()) throw DataError("triple-pair evaluation on zero items");
  const auto& vocab = models.lexicon.vocab();
  using Key = std::array<PredicateId, 3>;
  std::map<Key, std::size_t> context_index;
  std::vector<Key> contexts;
  std::vector<std::size_t> item_context;
  std::vector<PredicateId> targets;
  for (const auto& item : items) {
    const Key key{vocab.id_of(item.subject), vocab.id_of(item.verb1),
                  vocab.id_of(item.object)};
    auto [it, inserted] = context_index.emplace(key, contexts.size());
    if (inserted) contexts.push_back(key);
    item_context.push_back(it->second);
    targets.push_back(vocab.id_of(item.verb2));
  }
  const auto candidates = distinct(targets);

  std::vector<ObservationPattern> patterns(contexts.size());
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    patterns[i]
        .set(Node::kX, contexts[i][0])
        .set(Node::kY, contexts[i][1])
        .set(Node::kZ, contexts[i][2]);
  }
  const auto posteriors = infer_all(patterns, models, config);

  EvalResult result;
  result.n_items = items.size();
  result.scores.resize(items.size());
  parallel_for(items.size(), config.jobs, [&](std::size_t i) {
    result.scores[i] = -rank_of(targets[i], candidates,
                                posteriors[item_context[i]], Node::kY,
                                models.lexicon);
  });
  for (const auto& item : items) result.gold.push_back(item.gold);
  result.value = spearman(result.scores, result.gold);
  return result;
}

EvalResult eval_relpron(std::span<const RelpronItem> items,
                        const EvalModels& models, const EvalConfig& config) {
  if (items.empty()) throw DataError("RELPRON evaluation on zero terms");
  const auto& vocab = models.lexicon.vocab();
  using Key = std::tuple<PredicateId, PredicateId, PredicateId, ClauseType>;
  std::map<Key, std::size_t> prop_index;
  std::vector<Key> props;
  std::vector<std::vector<std::size_t>> item_props(items.size());
  for (std::size_t t = 0; t < items.size(); ++t) {
    const auto& item = items[t];
    if (std::none_of(item.properties.begin(), item.properties.end(),
                     [](const RelpronProperty& p) { return p.relevant; })) {
      throw DataError("RELPRON term '" + item.term +
                      "' has no relevant property");
    }
    for (const auto& p : item.properties) {
      const Key key{vocab.id_of(p.head_noun), vocab.id_of(p.event),
                    vocab.id_of(p.other_noun), p.clause};
      auto [it, inserted] = prop_index.emplace(key, props.size());
      if (inserted) props.push_back(key);
      item_props[t].push_back(it->second);
    }
  }

  std::vector<ObservationPattern> patterns(props.size());
  for (std::size_t i = 0; i < props.size(); ++i) {
    const auto& [head, event, other, clause] = props[i];
    const bool subject = clause == ClauseType::kSubject;
    patterns[i]
        .set(subject ? Node::kX : Node::kZ, head)
        .set(Node::kY, event)
        .set(subject ? Node::kZ : Node::kX, other);
  }
  const auto posteriors = infer_all(patterns, models, config);

  EvalResult result;
  result.n_items = items.size();
  result.scores.resize(items.size());
  parallel_for(items.size(), config.jobs, [&](std::size_t t) {
    const auto& item = items[t];
    const PredicateId term = vocab.id_of(item.term);
    const std::size_t m = item.properties.size();
    std::vector<double> truth(m);
    for (std::size_t k = 0; k < m; ++k) {
      const auto p = item_props[t][k];
      const Node head_node = std::get<3>(props[p]) == ClauseType::kSubject
                                 ? Node::kX
                                 : Node::kZ;
      truth[k] = approx_truth(posteriors[p], head_node, models.lexicon, term);
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return truth[a] > truth[b];
                     });
    std::vector<bool> relevance(m);
    for (std::size_t k = 0; k < m; ++k) {
      relevance[k] = item.properties[order[k]].relevant;
    }
    result.scores[t] = average_precision(relevance);
  });
  result.value =
      std::accumulate(result.scores.begin(), result.scores.end(), 0.0) /
      static_cast<double>(result.scores.size());
  return result;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd retrieval_baseline(PredicateId pred,
                                   std::span<const LabeledTriple> triples,
                                   const FeatureFile& pixies,
                                   std::optional<Node> node) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(pixies.dim());
  std::int64_t count = 0;
  for (const auto& t : triples) {
    for (Node n : kAllNodes) {
      if (node && *node != n) continue;
      if (t.pred(n) != pred) continue;
      sum += pixies.row(t.row(n));
      ++count;
    }
  }
  if (count == 0) {
    throw DataError("predicate " + std::to_string(pred) +
                    " has no annotated pixie");
  }
  return sum / static_cast<double>(count);
}

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double denom = a.norm() * b.norm();
  if (denom == 0.0) throw NumericalError("cosine of a zero vector");
  return a.dot(b) / denom;
}

EvalResult retrieval_word_pairs(std::span<const WordPairItem> items,
                                const Vocabulary& vocab,
                                std::span<const LabeledTriple> triples,
                                const FeatureFile& pixies) {
  if (items.empty()) throw DataError("word-pair evaluation on zero items");
  std::map<PredicateId, Eigen::VectorXd> centroids;
  const auto centroid = [&](PredicateId id) -> const Eigen::VectorXd& {
    auto it = centroids.find(id);
    if (it == centroids.end()) {
      it = centroids.emplace(id, retrieval_baseline(id, triples, pixies)).first;
    }
    return it->second;
  };
  EvalResult result;
  result.n_items = items.size();
  for (const auto& item : items) {
    result.scores.push_back(cosine_similarity(centroid(vocab.id_of(item.w1)),
                                              centroid(vocab.id_of(item.w2))));
    result.gold.push_back(item.gold);
  }
  result.value = spearman(result.scores, result.gold);
  return result;
}

// ---------------------------------------------------------------------------

BootstrapMetric spearman_metric() {
  return [](std::span<const double> scores, std::span<const double> gold) {
    return guarded(&spearman, scores, gold);
  };
}

BootstrapMetric mean_metric() {
  return [](std::span<const double> scores,
            std::span<const double>) -> std::optional<double> {
    if (scores.empty()) return std::nullopt;
    return std::accumulate(scores.begin(), scores.end(), 0.0) /
           static_cast<double>(scores.size());
  };
}

double bootstrap_test(std::span<const double> scores_a,
                      std::span<const double> scores_b,
                      std::span<const double> gold,
                      const BootstrapMetric& metric, int samples,
                      std::uint64_t seed) {
  if (scores_a.size() != scores_b.size() || scores_a.size() != gold.size()) {
    throw DataError("bootstrap inputs differ in length");
  }
  if (scores_a.empty()) throw DataError("bootstrap on zero items");
  if (samples <= 0) throw ConfigError("bootstrap samples must be positive");
  const auto obs_a = metric(scores_a, gold);
  const auto obs_b = metric(scores_b, gold);
  if (!obs_a || !obs_b) {
    throw DataError("metric undefined on the observed data");
  }
  const double observed = *obs_a - *obs_b;

  const std::size_t n = scores_a.size();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<double> ra(n), rb(n), rg(n);
  int extreme = 0, valid = 0;
  for (int s = 0; s < samples; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = pick(rng);
      ra[i] = scores_a[j];
      rb[i] = scores_b[j];
      rg[i] = gold[j];
    }
    const auto ma = metric(ra, rg);
    const auto mb = metric(rb, rg);
    if (!ma || !mb) continue;
    ++valid;
    const double d = *ma - *mb;
    if (std::abs(d - observed) >= std::abs(observed)) ++extreme;
  }
  if (valid == 0) {
    throw NumericalError("metric undefined on every bootstrap resample");
  }
  if (valid < samples) {
    spdlog::warn("bootstrap skipped {} of {} resamples with an undefined metric",
                 samples - valid, samples);
  }
  return static_cast<double>(extreme) / static_cast<double>(valid);
}

}  // namespace fds
