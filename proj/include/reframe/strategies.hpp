#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace reframe {

struct CommentReplyPair;

enum class StrategyKind {
  hedging,
  acknowledgement,
  elaboration,
  grounding,
  gratitude,
  agreement,
  baseline_paraphrase,
  baseline_receptive,
  original,
};

inline constexpr std::array<StrategyKind, 6> kReframingStrategies = {
    StrategyKind::hedging,   StrategyKind::acknowledgement,
    StrategyKind::elaboration, StrategyKind::grounding,
    StrategyKind::gratitude, StrategyKind::agreement,
};

// The eight kinds a chat model is asked to produce.
inline constexpr std::array<StrategyKind, 8> kGeneratableKinds = {
    StrategyKind::hedging,   StrategyKind::acknowledgement,
    StrategyKind::elaboration, StrategyKind::grounding,
    StrategyKind::gratitude, StrategyKind::agreement,
    StrategyKind::baseline_paraphrase, StrategyKind::baseline_receptive,
};

inline constexpr std::array<StrategyKind, 9> kAllKinds = {
    StrategyKind::hedging,   StrategyKind::acknowledgement,
    StrategyKind::elaboration, StrategyKind::grounding,
    StrategyKind::gratitude, StrategyKind::agreement,
    StrategyKind::baseline_paraphrase, StrategyKind::baseline_receptive,
    StrategyKind::original,
};

std::string_view to_string(StrategyKind kind);

// Accepts the canonical keys plus the aliases "paraphrase", "receptive",
// "b1", "b2" and "original_reply". Throws DataError otherwise.
StrategyKind parse_strategy(std::string_view text);

// Parses "all" or a comma-separated list of generatable kinds.
std::vector<StrategyKind> parse_strategy_list(std::string_view text);

bool is_reframing_strategy(StrategyKind kind);
bool is_baseline(StrategyKind kind);

struct Strategy {
  StrategyKind kind;
  std::string key;
  std::string display_name;
  std::string definition;    // empty for baselines and original
  std::string prompt_label;  // text substituted into the instruction template
};

struct Exemplar {
  std::string comment;
  std::string reply;
  std::map<StrategyKind, std::string> reframes;
};

struct Shot {
  std::string comment;
  std::string reply;
  std::string reframe;
};

struct PromptBundle {
  std::string instruction;
  std::vector<Shot> shots;
  std::string target_comment;
  std::string target_reply;
  // Appended to the final user turn on a regeneration attempt; empty otherwise.
  std::string reminder;
};

struct ChatMessage {
  std::string role;
  std::string content;
};

// Immutable view of the embedded strategy data file.
class StrategyRegistry {
 public:
  static const StrategyRegistry& instance();

  int version() const { return version_; }
  const Strategy& strategy(StrategyKind kind) const;
  std::span<const Exemplar> exemplars() const { return exemplars_; }
  const std::string& length_reminder() const { return length_reminder_; }
  std::string instruction(StrategyKind kind) const;

 private:
  StrategyRegistry();

  int version_ = 0;
  std::array<Strategy, 9> strategies_;
  std::vector<Exemplar> exemplars_;
  std::string template_;
  std::string paraphrase_instruction_;
  std::string receptive_instruction_;
  std::string length_reminder_;
};

// Verbatim definition; throws ConfigError for baselines and original.
const std::string& strategy_definition(StrategyKind kind);

PromptBundle build_prompt(StrategyKind kind, std::string_view comment,
                          std::string_view reply);
PromptBundle build_prompt(StrategyKind kind, const CommentReplyPair& pair);

PromptBundle with_length_reminder(PromptBundle bundle);

// "Comment: <comment>\nReply: <reply>"
std::string user_turn(std::string_view comment, std::string_view reply);

// One system turn, then user/assistant per shot, then the target user turn.
std::vector<ChatMessage> to_messages(const PromptBundle& bundle);

nlohmann::ordered_json to_json(const std::vector<ChatMessage>& messages);

// Definitions, instructions and exemplars for audit output.
nlohmann::ordered_json registry_dump();

}  // namespace reframe
