#include "reframe/textmetrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iterator>

#include "reframe/error.hpp"
#include "reframe/text.hpp"

namespace reframe {

std::vector<std::string> tokenize(std::string_view input) {
  std::vector<std::string> tokens;
  for (const auto raw : text::split_whitespace(input)) {
    const auto stripped = text::strip_punctuation(raw);
    if (!stripped.empty()) tokens.push_back(text::lowercase(stripped));
  }
  return tokens;
}

NGramSet ngrams(std::span<const std::string> tokens, int n) {
  if (n < 1) throw DataError("n-gram order must be positive");
  NGramSet out;
  out.n = n;
  const auto order = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
    NGram gram = tokens[i];
    for (std::size_t k = 1; k < order; ++k) {
      gram.push_back(' ');
      gram.append(tokens[i + k]);
    }
    out.grams.insert(std::move(gram));
  }
  return out;
}

NGramSet ngrams(std::string_view input, int n) {
  const auto tokens = tokenize(input);
  return ngrams(tokens, n);
}

double form_dissimilarity(std::string_view candidate, std::string_view reference) {
  const auto cand = tokenize(candidate);
  if (cand.empty()) throw DataError("form dissimilarity needs a non-empty candidate");
  const auto ref = tokenize(reference);
  double sum = 0.0;
  int orders = 0;
  for (int n = 1; n <= 4; ++n) {
    const NGramSet c = ngrams(cand, n);
    if (c.grams.empty()) continue;
    const NGramSet r = ngrams(ref, n);
    std::size_t missing = 0;
    for (const auto& g : c.grams) {
      if (!r.grams.contains(g)) ++missing;
    }
    sum += static_cast<double>(missing) / static_cast<double>(c.grams.size());
    ++orders;
  }
  return sum / orders;
}

std::string contextual_reference(std::string_view comment, std::string_view reply) {
  std::string out(comment);
  out.push_back(' ');
  out.append(reply);
  return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DataError("embedding dimensions differ");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double semantic_similarity(std::string_view candidate, std::string_view reference,
                           EmbeddingClient& embedder) {
  const auto a = embedder.embed(candidate);
  const auto b = embedder.embed(reference);
  return cosine_similarity(a, b);
}

double contradiction_rate(std::span<const ContradictionItem> items, NliClient& nli,
                          int parallelism) {
  if (items.empty()) throw DataError("contradiction rate of an empty list");
  std::vector<char> contradicts(items.size(), 0);
  run_bounded(items.size(), parallelism, [&](std::size_t i) {
    contradicts[i] =
        nli.nli(items[i].original, items[i].reframe).label == NliLabel::contradiction;
  });
  const auto hits = std::count(contradicts.begin(), contradicts.end(), 1);
  return static_cast<double>(hits) / static_cast<double>(items.size());
}

std::set<NGram> added_trigrams(std::string_view original, std::string_view reframe) {
  const NGramSet before = ngrams(original, 3);
  NGramSet after = ngrams(reframe, 3);
  std::set<NGram> added;
  std::set_difference(after.grams.begin(), after.grams.end(), before.grams.begin(),
                      before.grams.end(), std::inserter(added, added.end()));
  return added;
}

void TrigramStats::add(StrategyKind strategy, const std::set<NGram>& added) {
  ++reframes_[strategy];
  auto& counts = counts_[strategy];
  for (const auto& t : added) {
    ++counts[t];
    ++totals_[t];
  }
}

std::vector<StrategyKind> TrigramStats::strategies() const {
  std::vector<StrategyKind> out;
  for (const auto& [s, n] : reframes_) out.push_back(s);
  return out;
}

bool TrigramStats::has(StrategyKind strategy) const { return reframes_.contains(strategy); }

std::size_t TrigramStats::reframe_count(StrategyKind strategy) const {
  const auto it = reframes_.find(strategy);
  return it == reframes_.end() ? 0 : it->second;
}

std::size_t TrigramStats::count(StrategyKind strategy, const NGram& trigram) const {
  const auto s = counts_.find(strategy);
  if (s == counts_.end()) return 0;
  const auto t = s->second.find(trigram);
  return t == s->second.end() ? 0 : t->second;
}

double TrigramStats::p_trigram_given_strategy(StrategyKind strategy, const NGram& trigram) const {
  const std::size_t n = reframe_count(strategy);
  if (n == 0) throw DataError("strategy '" + std::string(to_string(strategy)) + "' has no reframes");
  return static_cast<double>(count(strategy, trigram)) / static_cast<double>(n);
}

double TrigramStats::p_strategy_given_trigram(StrategyKind strategy, const NGram& trigram) const {
  const auto it = totals_.find(trigram);
  if (it == totals_.end()) throw DataError("trigram '" + trigram + "' was never added");
  return static_cast<double>(count(strategy, trigram)) / static_cast<double>(it->second);
}

std::set<NGram> TrigramStats::vocabulary(StrategyKind strategy) const {
  std::set<NGram> out;
  if (const auto it = counts_.find(strategy); it != counts_.end()) {
    for (const auto& [t, c] : it->second) out.insert(t);
  }
  return out;
}

std::set<NGram> TrigramStats::trigrams() const {
  std::set<NGram> out;
  for (const auto& [t, c] : totals_) out.insert(t);
  return out;
}

std::vector<TrigramStats::Entry> TrigramStats::top(StrategyKind strategy, std::size_t limit) const {
  std::vector<Entry> entries;
  if (const auto it = counts_.find(strategy); it != counts_.end()) {
    for (const auto& [t, c] : it->second) {
      entries.push_back({t, c, p_trigram_given_strategy(strategy, t),
                         p_strategy_given_trigram(strategy, t)});
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.trigram < b.trigram;
  });
  if (limit != 0 && entries.size() > limit) entries.resize(limit);
  return entries;
}

TrigramStats strategy_trigram_stats(std::span<const Reframe> reframes,
                                    const std::map<std::string, std::string>& originals) {
  TrigramStats stats;
  for (const auto& r : reframes) {
    if (r.strategy == StrategyKind::original) continue;
    const auto it = originals.find(r.pair_id);
    if (it == originals.end()) throw DataError("unknown pair_id '" + r.pair_id + "'");
    stats.add(r.strategy, added_trigrams(it->second, r.text));
  }
  if (stats.strategies().empty()) throw DataError("no reframes to analyze");
  return stats;
}

double strategy_overlap(StrategyKind a, StrategyKind b, const TrigramStats& stats) {
  for (const StrategyKind s : {a, b}) {
    if (!stats.has(s)) {
      throw DataError("strategy '" + std::string(to_string(s)) + "' is absent from the statistics");
    }
  }
  if (a == b) return 1.0;
  const auto va = stats.vocabulary(a);
  const auto vb = stats.vocabulary(b);
  if (va.empty() && vb.empty()) return 1.0;
  std::size_t shared = 0;
  for (const auto& t : va) shared += vb.contains(t) ? 1 : 0;
  const std::size_t united = va.size() + vb.size() - shared;
  return static_cast<double>(shared) / static_cast<double>(united);
}

ValidationRow validate_strategy(StrategyKind strategy, std::span<const Reframe> reframes,
                                const std::map<std::string, PairText>& pairs,
                                EmbeddingClient& embedder, NliClient& nli, int parallelism) {
  std::vector<const Reframe*> selected;
  for (const auto& r : reframes) {
    if (r.strategy != strategy) continue;
    if (!pairs.contains(r.pair_id)) throw DataError("unknown pair_id '" + r.pair_id + "'");
    selected.push_back(&r);
  }
  ValidationRow row;
  row.strategy = strategy;
  row.n = selected.size();
  if (selected.empty()) return row;

  struct ItemMetrics {
    double ngram_context, ngram_reply, sim_context, sim_reply;
  };
  std::vector<ItemMetrics> metrics(selected.size());
  std::vector<ContradictionItem> items;
  for (const Reframe* r : selected) items.push_back({pairs.at(r->pair_id).reply, r->text});

  run_bounded(selected.size(), parallelism, [&](std::size_t i) {
    const Reframe& r = *selected[i];
    const PairText& p = pairs.at(r.pair_id);
    const std::string context = contextual_reference(p.comment, p.reply);
    metrics[i] = {form_dissimilarity(r.text, context), form_dissimilarity(r.text, p.reply),
                  semantic_similarity(r.text, context, embedder),
                  semantic_similarity(r.text, p.reply, embedder)};
  });
  for (const auto& m : metrics) {
    row.distinct_ngrams_context += m.ngram_context;
    row.distinct_ngrams_reply += m.ngram_reply;
    row.similarity_context += m.sim_context;
    row.similarity_reply += m.sim_reply;
  }
  const double n = static_cast<double>(selected.size());
  row.distinct_ngrams_context /= n;
  row.distinct_ngrams_reply /= n;
  row.similarity_context /= n;
  row.similarity_reply /= n;
  row.contradiction_rate = contradiction_rate(items, nli, parallelism);
  return row;
}

}  // namespace reframe
