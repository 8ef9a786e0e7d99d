#include <doctest.h>

#include <sstream>

#include "generators.hpp"
#include "reframe/corpus.hpp"
#include "reframe/error.hpp"

using namespace reframe;

namespace {

CommentReplyPair make(std::string id, std::string reply, Label label = Label::disagree,
                      std::optional<double> tox = 0.1, std::string sub = "politics") {
  return {std::move(id), std::move(sub), "some comment", std::move(reply), label, tox};
}

std::string words(std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += (i ? " w" : "w");
  return s;
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("word count splits on whitespace only") {
    CHECK(word_count("") == 0);
    CHECK(word_count("hello world") == 2);
    CHECK(word_count("don't  stop\xE2\x80\x94now") == 2);
    CHECK(word_count("a\xC2\xA0" "b\xE2\x80\x83" "c") == 3);  // NBSP, EM SPACE
    CHECK(word_count("  \t\n ") == 0);
  }

  TEST_CASE("parse well-formed, empty and blank-line files") {
    std::istringstream in(
        R"({"id":"a","subreddit":"s","comment":"c","reply":"r","label":"disagree"})" "\n"
        "\n"
        R"({"id":7,"subreddit":"s","comment":"c","reply":"r","label":"Agree","toxicity":0.4})" "\n"
        R"({"id":"b","subreddit":"s","comment":"c","reply":"r","label":"neutral","toxicity":null})" "\n");
    const auto pairs = parse_corpus(in);
    REQUIRE(pairs.size() == 3);
    CHECK(pairs[1].id == "7");
    CHECK(pairs[1].label == Label::agree);
    CHECK(pairs[1].reply_toxicity == doctest::Approx(0.4));
    CHECK_FALSE(pairs[2].reply_toxicity.has_value());
    std::istringstream empty("");
    CHECK(parse_corpus(empty).empty());
  }

  TEST_CASE("errors carry line numbers") {
    const auto line_of = [](const std::string& text) -> std::size_t {
      std::istringstream in(text);
      try {
        parse_corpus(in);
      } catch (const DataError& e) {
        return e.line();
      }
      return 0;
    };
    const std::string ok =
        R"({"id":"a","subreddit":"s","comment":"c","reply":"r","label":"disagree"})" "\n";
    CHECK(line_of(ok + ok) == 2);  // duplicate id
    CHECK(line_of(ok + "{not json\n") == 2);
    CHECK(line_of(ok + "\n" + R"({"id":"b","subreddit":"s","comment":"c","label":"agree"})") == 3);
    CHECK(line_of(R"({"id":"b","subreddit":"s","comment":"c","reply":"r","label":"maybe"})") == 1);
    CHECK(line_of(R"({"id":"b","subreddit":"s","comment":"  ","reply":"r","label":"agree"})") == 1);
    CHECK(line_of(R"({"id":"b","subreddit":"s","comment":"c","reply":"r","label":"agree","toxicity":1.5})") == 1);
    CHECK_THROWS_AS(load_corpus("/nonexistent/corpus.jsonl"), DataError);
  }

  TEST_CASE("filter rules and exclusion counts") {
    const std::vector<CommentReplyPair> pairs = {
        make("keep", "fine reply"),
        make("long", words(31)),
        make("edge", words(30)),
        make("agree", "ok", Label::agree),
        make("brexit", "no", Label::disagree, 0.1, "r/brexit"),
        make("toxic", "bad", Label::disagree, 0.95),
        make("boundary", "fine", Label::disagree, 0.9),
    };
    const FilterResult r = filter_pairs(pairs, FilterConfig{});
    std::vector<std::string> ids;
    for (const auto& p : r.pairs) ids.push_back(p.id);
    CHECK(ids == std::vector<std::string>{"keep", "edge", "boundary"});
    CHECK(r.report.input == 7);
    CHECK(r.report.label == 1);
    CHECK(r.report.length == 1);
    CHECK(r.report.subreddit == 1);
    CHECK(r.report.toxicity == 1);
    CHECK(r.report.kept == 3);
  }

  TEST_CASE("toxicity is required only when the rule applies") {
    const std::vector<CommentReplyPair> pairs = {make("a", "x", Label::disagree, std::nullopt),
                                                 make("b", "x", Label::agree, std::nullopt)};
    CHECK_THROWS_AS(filter_pairs(pairs, FilterConfig{}), DataError);
    FilterConfig no_tox;
    no_tox.apply_toxicity = false;
    CHECK(filter_pairs(pairs, no_tox).pairs.size() == 1);
    // The agreeing pair never reaches the toxicity rule.
    CHECK_NOTHROW(filter_pairs(std::span(pairs).subspan(1), FilterConfig{}));
  }

  TEST_CASE("config validation") {
    FilterConfig c;
    c.max_words = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.max_words = 30;
    c.toxicity_cutoff = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.toxicity_cutoff = 1.0;
    CHECK_NOTHROW(c.validate());
  }

  TEST_CASE("property: filtering is idempotent and order preserving") {
    gen::Rng rng(11);
    const char* subs[] = {"politics", "Brexit", "news", "r/BREXIT"};
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<CommentReplyPair> pairs;
      const std::size_t n = gen::uniform(rng, 0, 20);
      for (std::size_t i = 0; i < n; ++i) {
        CommentReplyPair p;
        p.id = "p" + std::to_string(i);
        p.subreddit = subs[gen::uniform(rng, 0, 3)];
        p.comment = gen::sentence(rng, 1, 35);
        p.reply = gen::sentence(rng, 1, 35);
        p.label = static_cast<Label>(gen::uniform(rng, 0, 2));
        p.reply_toxicity = static_cast<double>(gen::uniform(rng, 0, 100)) / 100.0;
        pairs.push_back(p);
      }
      FilterConfig cfg;
      cfg.max_words = gen::uniform(rng, 5, 30);
      const auto once = filter_pairs(pairs, cfg);
      const auto twice = filter_pairs(once.pairs, cfg);
      REQUIRE(twice.pairs.size() == once.pairs.size());
      CHECK(twice.report.kept == once.report.kept);
      std::size_t j = 0;
      for (const auto& p : pairs) {
        if (j < once.pairs.size() && once.pairs[j].id == p.id) {
          CHECK(once.pairs[j].reply == p.reply);
          CHECK(twice.pairs[j].id == p.id);
          ++j;
        }
      }
      CHECK(j == once.pairs.size());  // subsequence
      const auto& rep = once.report;
      CHECK(rep.label + rep.length + rep.subreddit + rep.toxicity + rep.kept == rep.input);
    }
  }

  TEST_CASE("write and reload round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "reframe_corpus_rt";
    std::filesystem::create_directories(dir);
    const std::vector<CommentReplyPair> pairs = {make("a", "r\xC3\xA9ply \"quoted\""),
                                                 make("b", "x", Label::agree, std::nullopt)};
    write_corpus(dir / "c.jsonl", pairs);
    const auto back = load_corpus(dir / "c.jsonl");
    REQUIRE(back.size() == 2);
    CHECK(back[0].reply == pairs[0].reply);
    CHECK(back[0].reply_toxicity == pairs[0].reply_toxicity);
    CHECK_FALSE(back[1].reply_toxicity.has_value());
    CHECK(back[1].label == Label::agree);
    std::filesystem::remove_all(dir);
  }
}
