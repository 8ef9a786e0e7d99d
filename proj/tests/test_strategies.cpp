#include <doctest.h>

#include <fstream>
#include <sstream>

#include "reframe/error.hpp"
#include "reframe/strategies.hpp"

using namespace reframe;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string render(const std::vector<ChatMessage>& messages) {
  std::string out;
  for (const auto& m : messages) out += "### " + m.role + "\n" + m.content + "\n";
  return out;
}

const char* kComment = "Golden comment about public transit funding.";
const char* kReply = "Golden reply saying it is a waste of money.";

}  // namespace

TEST_SUITE("strategies") {
  TEST_CASE("rendered prompts match the golden files byte for byte") {
    for (const StrategyKind kind : kGeneratableKinds) {
      CAPTURE(to_string(kind));
      const auto golden =
          read_file(std::filesystem::path(GOLDEN_DIR) / (std::string(to_string(kind)) + ".txt"));
      REQUIRE_FALSE(golden.empty());
      CHECK(render(to_messages(build_prompt(kind, kComment, kReply))) == golden);
    }
  }

  TEST_CASE("instructions and definitions") {
    CHECK(StrategyRegistry::instance().instruction(StrategyKind::baseline_paraphrase) ==
          "Paraphrase the following reply to the comment. Use at most 30 words");
    CHECK(StrategyRegistry::instance().instruction(StrategyKind::baseline_receptive) ==
          "Rewrite the following reply to the comment to be more receptive. Use at most 30 words.");
    CHECK(StrategyRegistry::instance().instruction(StrategyKind::agreement) ==
          "Rewrite the reply using compromise and agreement, following the examples. Agreement "
          "means making explicit any agreement with the comment. Use at most 30 words.");
    CHECK(strategy_definition(StrategyKind::gratitude) ==
          "showing appreciation for someone\xE2\x80\x99s thoughts and opinions");
    CHECK_THROWS_AS(strategy_definition(StrategyKind::baseline_paraphrase), ConfigError);
    CHECK_THROWS_AS(StrategyRegistry::instance().instruction(StrategyKind::original), ConfigError);
    CHECK_THROWS_AS(build_prompt(StrategyKind::original, "c", "r"), ConfigError);
  }

  TEST_CASE("five exemplars with all six reframes; baselines are zero-shot") {
    const auto ex = StrategyRegistry::instance().exemplars();
    REQUIRE(ex.size() == 5);
    for (const auto& e : ex) CHECK(e.reframes.size() == 6);
    CHECK(ex[1].reframes.at(StrategyKind::hedging) ==
          "Perhaps being a single issue voter is not the best position to hold.");
    CHECK(build_prompt(StrategyKind::hedging, "c", "r").shots.size() == 5);
    CHECK(build_prompt(StrategyKind::baseline_receptive, "c", "r").shots.empty());
  }

  TEST_CASE("prompts are deterministic and carry the target") {
    const auto a = to_messages(build_prompt(StrategyKind::grounding, "x", "y"));
    const auto b = to_messages(build_prompt(StrategyKind::grounding, "x", "y"));
    CHECK(render(a) == render(b));
    CHECK(a.size() == 12);
    CHECK(a.back().content == "Comment: x\nReply: y");
  }

  TEST_CASE("length reminder goes on the final user turn") {
    const auto bundle = with_length_reminder(build_prompt(StrategyKind::hedging, "x", "y"));
    const auto m = to_messages(bundle);
    CHECK(m.back().content ==
          "Comment: x\nReply: y\n" + StrategyRegistry::instance().length_reminder());
    CHECK(m[0].content == StrategyRegistry::instance().instruction(StrategyKind::hedging));
  }

  TEST_CASE("kind parsing") {
    CHECK(parse_strategy("paraphrase") == StrategyKind::baseline_paraphrase);
    CHECK(parse_strategy("Hedging") == StrategyKind::hedging);
    CHECK(parse_strategy("original_reply") == StrategyKind::original);
    CHECK_THROWS_AS(parse_strategy("sarcasm"), DataError);
    CHECK(parse_strategy_list("all").size() == 8);
    CHECK(parse_strategy_list("agreement,hedging,hedging") ==
          std::vector<StrategyKind>{StrategyKind::hedging, StrategyKind::agreement});
    CHECK_THROWS(parse_strategy_list("original"));
  }
}
