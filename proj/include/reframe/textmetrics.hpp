#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "reframe/gateway.hpp"
#include "reframe/reframer.hpp"
#include "reframe/strategies.hpp"

namespace reframe {

// Lowercased, whitespace-split, edge punctuation stripped, empties dropped.
std::vector<std::string> tokenize(std::string_view text);

// Tokens never contain whitespace, so an n-gram is stored as its tokens joined
// by single spaces.
using NGram = std::string;

struct NGramSet {
  int n = 0;
  std::set<NGram> grams;
};

NGramSet ngrams(std::span<const std::string> tokens, int n);
NGramSet ngrams(std::string_view text, int n);

// Mean over n = 1..4 of the fraction of distinct candidate n-grams missing from
// the reference. Orders with no candidate n-gram are skipped. Throws DataError
// on an empty candidate.
double form_dissimilarity(std::string_view candidate, std::string_view reference);

// Reference text for the in-context comparisons: comment, a space, reply.
std::string contextual_reference(std::string_view comment, std::string_view reply);

// 0 when either vector has zero norm.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

double semantic_similarity(std::string_view candidate, std::string_view reference,
                           EmbeddingClient& embedder);

struct ContradictionItem {
  std::string original;
  std::string reframe;
};

// Proportion of items whose NLI verdict (premise = original) is contradiction.
double contradiction_rate(std::span<const ContradictionItem> items, NliClient& nli,
                          int parallelism = 1);

std::set<NGram> added_trigrams(std::string_view original, std::string_view reframe);

// count(s, t) is the number of reframes of strategy s whose added-trigram set
// contains t.
class TrigramStats {
 public:
  void add(StrategyKind strategy, const std::set<NGram>& added);

  std::vector<StrategyKind> strategies() const;
  bool has(StrategyKind strategy) const;
  std::size_t reframe_count(StrategyKind strategy) const;
  std::size_t count(StrategyKind strategy, const NGram& trigram) const;

  double p_trigram_given_strategy(StrategyKind strategy, const NGram& trigram) const;
  double p_strategy_given_trigram(StrategyKind strategy, const NGram& trigram) const;

  // All trigrams added at least once by the strategy.
  std::set<NGram> vocabulary(StrategyKind strategy) const;
  // Every trigram observed under any strategy.
  std::set<NGram> trigrams() const;

  struct Entry {
    NGram trigram;
    std::size_t count = 0;
    double p_t_given_s = 0.0;
    double p_s_given_t = 0.0;
  };
  // Sorted by P(t|s) descending, then trigram ascending. limit 0 = all.
  std::vector<Entry> top(StrategyKind strategy, std::size_t limit = 0) const;

 private:
  std::map<StrategyKind, std::size_t> reframes_;
  std::map<StrategyKind, std::map<NGram, std::size_t>> counts_;
  std::map<NGram, std::size_t> totals_;
};

// `originals` maps pair_id to the original reply. Reframes of kind original
// are ignored. Throws DataError on an unknown pair_id.
TrigramStats strategy_trigram_stats(std::span<const Reframe> reframes,
                                    const std::map<std::string, std::string>& originals);

// Jaccard index of the two strategies' added-trigram vocabularies.
double strategy_overlap(StrategyKind a, StrategyKind b, const TrigramStats& stats);

// Per-strategy means of the automatic meaning-preservation metrics.
struct ValidationRow {
  StrategyKind strategy;
  std::size_t n = 0;
  double distinct_ngrams_context = 0.0;
  double distinct_ngrams_reply = 0.0;
  double similarity_context = 0.0;
  double similarity_reply = 0.0;
  double contradiction_rate = 0.0;
};

struct PairText {
  std::string comment;
  std::string reply;
};

ValidationRow validate_strategy(StrategyKind strategy, std::span<const Reframe> reframes,
                                const std::map<std::string, PairText>& pairs,
                                EmbeddingClient& embedder, NliClient& nli,
                                int parallelism = 1);

}  // namespace reframe
