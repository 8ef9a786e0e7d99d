#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "oracles.hpp"
#include "reframe/error.hpp"
#include "reframe/textmetrics.hpp"

using namespace reframe;

namespace {

ProviderConfig mock() {
  ProviderConfig c;
  c.mock = true;
  c.model = "mock";
  return c;
}

Reframe reframe_of(std::string pair_id, StrategyKind kind, std::string text) {
  Reframe r;
  r.pair_id = std::move(pair_id);
  r.strategy = kind;
  r.text = std::move(text);
  return r;
}

}  // namespace

TEST_SUITE("textmetrics") {
  TEST_CASE("tokenize and n-grams") {
    CHECK(tokenize("Hello, World!  it's") == std::vector<std::string>{"hello", "world", "it's"});
    CHECK(tokenize(" ... ").empty());
    const auto g = ngrams("a b a b", 2);
    CHECK(g.grams == std::set<NGram>{"a b", "b a"});
    CHECK(ngrams("a b", 3).grams.empty());
  }

  TEST_CASE("form dissimilarity examples") {
    CHECK(form_dissimilarity("the cat sat", "the cat sat") == 0.0);
    CHECK(form_dissimilarity("dog runs", "the cat sat") == 1.0);
    // unigrams 1/2 missing, bigram 1/1 missing -> (0.5 + 1) / 2
    CHECK(form_dissimilarity("the dog", "the cat") == doctest::Approx(0.75));
    CHECK_THROWS_AS(form_dissimilarity("  ", "x"), DataError);
    CHECK(contextual_reference("c", "r") == "c r");
  }

  TEST_CASE("oracle: form dissimilarity and added trigrams on random instances") {
    gen::Rng rng(101);
    for (int trial = 0; trial < 300; ++trial) {
      const std::string cand = gen::sentence(rng);
      const std::string ref = gen::sentence(rng, 0);
      CAPTURE(cand);
      CAPTURE(ref);
      CHECK(std::abs(form_dissimilarity(cand, ref) - oracle::form_dissimilarity(cand, ref)) <= 1e-9);
      const auto ours = added_trigrams(ref, cand);
      CHECK(std::vector<std::string>(ours.begin(), ours.end()) == oracle::added_trigrams(ref, cand));
    }
  }

  TEST_CASE("oracle: strategy overlap and trigram probabilities") {
    gen::Rng rng(202);
    const std::vector<StrategyKind> kinds(kGeneratableKinds.begin(), kGeneratableKinds.end());
    for (int trial = 0; trial < 120; ++trial) {
      std::map<std::string, std::string> originals;
      std::vector<Reframe> reframes;
      const std::size_t pairs = gen::uniform(rng, 1, 6);
      for (std::size_t p = 0; p < pairs; ++p) {
        const std::string id = "p" + std::to_string(p);
        originals[id] = gen::sentence(rng);
        for (const StrategyKind k : kinds) {
          if (gen::uniform(rng, 0, 3) == 0) continue;
          reframes.push_back(reframe_of(id, k, gen::sentence(rng, 3)));
        }
      }
      reframes.push_back(reframe_of("p0", StrategyKind::original, "ignored entirely here"));
      const TrigramStats stats = strategy_trigram_stats(reframes, originals);

      std::map<StrategyKind, std::vector<std::string>> vocab;
      for (const auto& r : reframes) {
        if (r.strategy == StrategyKind::original) continue;
        auto added = oracle::added_trigrams(originals[r.pair_id], r.text);
        auto& v = vocab[r.strategy];
        v.insert(v.end(), added.begin(), added.end());
      }
      const auto present = stats.strategies();
      for (const auto a : present) {
        for (const auto b : present) {
          CHECK(std::abs(strategy_overlap(a, b, stats) - oracle::jaccard(vocab[a], vocab[b])) <=
                1e-9);
        }
      }
      for (const auto& t : stats.trigrams()) {
        double total = 0.0;
        for (const auto s : present) total += stats.p_strategy_given_trigram(s, t);
        CHECK(std::abs(total - 1.0) <= 1e-9);
      }
    }
  }

  TEST_CASE("trigram ranking") {
    std::map<std::string, std::string> originals{{"a", "no way"}, {"b", "wrong"}, {"c", "nah"}};
    std::vector<Reframe> rs = {
        reframe_of("a", StrategyKind::gratitude, "Thank you for sharing, but no way."),
        reframe_of("b", StrategyKind::gratitude, "Thank you for this; still wrong."),
        reframe_of("c", StrategyKind::hedging, "I think that thank you for nah"),
    };
    const auto stats = strategy_trigram_stats(rs, originals);
    const auto top = stats.top(StrategyKind::gratitude, 1);
    REQUIRE(top.size() == 1);
    CHECK(top[0].trigram == "thank you for");
    CHECK(top[0].p_t_given_s == doctest::Approx(1.0));
    CHECK(top[0].p_s_given_t == doctest::Approx(2.0 / 3.0));
    CHECK(stats.reframe_count(StrategyKind::gratitude) == 2);
    CHECK_THROWS_AS(strategy_overlap(StrategyKind::gratitude, StrategyKind::agreement, stats),
                    DataError);
    rs.push_back(reframe_of("zzz", StrategyKind::hedging, "x y z"));
    CHECK_THROWS_AS(strategy_trigram_stats(rs, originals), DataError);
  }

  TEST_CASE("similarity and contradiction with mock providers") {
    EmbeddingClient emb(make_executor(mock()));
    NliClient nli(make_executor(mock()));
    const double same = semantic_similarity("the cat sat", "the cat sat", emb);
    CHECK(same == doctest::Approx(1.0));
    const double other = semantic_similarity("zzz", "aaa", emb);
    CHECK(other >= -1.0);
    CHECK(other <= 1.0);
    CHECK(cosine_similarity(std::vector<double>{0, 0}, std::vector<double>{1, 0}) == 0.0);

    const std::vector<ContradictionItem> items = {
        {"cops are bad", "cops are not bad"},
        {"cops are bad", "cops are bad"},
        {"the sky is blue", "the sky is not blue"},
        {"cats purr", "dogs bark loudly at night"},
    };
    CHECK(contradiction_rate(items, nli, 2) == doctest::Approx(0.5));
    CHECK_THROWS_AS(contradiction_rate(std::span<const ContradictionItem>{}, nli), DataError);
  }

  TEST_CASE("validation rows aggregate per strategy") {
    EmbeddingClient emb(make_executor(mock()));
    NliClient nli(make_executor(mock()));
    std::map<std::string, PairText> pairs{{"a", {"comment one", "reply one"}},
                                         {"b", {"comment two", "reply two"}}};
    std::vector<Reframe> rs = {reframe_of("a", StrategyKind::hedging, "maybe reply one"),
                               reframe_of("b", StrategyKind::hedging, "reply two"),
                               reframe_of("a", StrategyKind::agreement, "reply one")};
    const auto row = validate_strategy(StrategyKind::hedging, rs, pairs, emb, nli);
    CHECK(row.n == 2);
    const double expected =
        (form_dissimilarity("maybe reply one", "reply one") + form_dissimilarity("reply two", "reply two")) / 2;
    CHECK(row.distinct_ngrams_reply == doctest::Approx(expected));
    CHECK(row.distinct_ngrams_context <= row.distinct_ngrams_reply + 1e-12);
    CHECK(row.contradiction_rate == 0.0);
  }
}
