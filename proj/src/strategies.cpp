#include "reframe/strategies.hpp"

#include <algorithm>

#include "reframe/corpus.hpp"
#include "reframe/error.hpp"
#include "reframe/text.hpp"
#include "strategy_data.hpp"

namespace reframe {

namespace {

struct KindName {
  StrategyKind kind;
  std::string_view key;
};

constexpr std::array<KindName, 9> kKindNames = {{
    {StrategyKind::hedging, "hedging"},
    {StrategyKind::acknowledgement, "acknowledgement"},
    {StrategyKind::elaboration, "elaboration"},
    {StrategyKind::grounding, "grounding"},
    {StrategyKind::gratitude, "gratitude"},
    {StrategyKind::agreement, "agreement"},
    {StrategyKind::baseline_paraphrase, "baseline_paraphrase"},
    {StrategyKind::baseline_receptive, "baseline_receptive"},
    {StrategyKind::original, "original"},
}};

std::size_t index_of(StrategyKind kind) { return static_cast<std::size_t>(kind); }

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos;
       pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

}  // namespace

std::string_view to_string(StrategyKind kind) { return kKindNames[index_of(kind)].key; }

StrategyKind parse_strategy(std::string_view raw) {
  const std::string value = text::lowercase(text::trim(raw));
  for (const auto& entry : kKindNames) {
    if (value == entry.key) return entry.kind;
  }
  if (value == "paraphrase" || value == "b1") return StrategyKind::baseline_paraphrase;
  if (value == "receptive" || value == "b2") return StrategyKind::baseline_receptive;
  if (value == "original_reply") return StrategyKind::original;
  throw DataError("unknown strategy '" + std::string(raw) + "'");
}

std::vector<StrategyKind> parse_strategy_list(std::string_view raw) {
  const std::string_view trimmed = text::trim(raw);
  if (trimmed == "all") return {kGeneratableKinds.begin(), kGeneratableKinds.end()};
  std::vector<StrategyKind> kinds;
  std::size_t start = 0;
  while (start <= trimmed.size()) {
    const std::size_t comma = trimmed.find(',', start);
    const std::string_view item =
        trimmed.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                              : comma - start);
    const StrategyKind kind = parse_strategy(item);
    if (kind == StrategyKind::original) {
      throw ConfigError("original is not a generatable strategy");
    }
    if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) kinds.push_back(kind);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  std::sort(kinds.begin(), kinds.end());
  return kinds;
}

bool is_reframing_strategy(StrategyKind kind) {
  return std::find(kReframingStrategies.begin(), kReframingStrategies.end(), kind) !=
         kReframingStrategies.end();
}

bool is_baseline(StrategyKind kind) {
  return kind == StrategyKind::baseline_paraphrase || kind == StrategyKind::baseline_receptive;
}

StrategyRegistry::StrategyRegistry() {
  const auto data = nlohmann::json::parse(detail::kStrategyData);
  version_ = data.at("version").get<int>();
  template_ = data.at("strategy_template").get<std::string>();
  paraphrase_instruction_ = data.at("baselines").at("baseline_paraphrase").get<std::string>();
  receptive_instruction_ = data.at("baselines").at("baseline_receptive").get<std::string>();
  length_reminder_ = data.at("length_reminder").get<std::string>();

  for (const auto& entry : kKindNames) {
    Strategy& s = strategies_[index_of(entry.kind)];
    s.kind = entry.kind;
    s.key = std::string(entry.key);
  }
  strategies_[index_of(StrategyKind::baseline_paraphrase)].display_name = "Paraphrase";
  strategies_[index_of(StrategyKind::baseline_receptive)].display_name = "Receptive";
  strategies_[index_of(StrategyKind::original)].display_name = "Original";

  for (const auto& item : data.at("strategies")) {
    const StrategyKind kind = parse_strategy(item.at("key").get<std::string>());
    Strategy& s = strategies_[index_of(kind)];
    s.display_name = item.at("display_name").get<std::string>();
    s.definition = item.at("definition").get<std::string>();
    s.prompt_label = item.at("prompt_label").get<std::string>();
  }

  for (const auto& item : data.at("exemplars")) {
    Exemplar ex;
    ex.comment = item.at("comment").get<std::string>();
    ex.reply = item.at("reply").get<std::string>();
    for (const auto& [key, value] : item.at("reframes").items()) {
      ex.reframes[parse_strategy(key)] = value.get<std::string>();
    }
    exemplars_.push_back(std::move(ex));
  }
}

const StrategyRegistry& StrategyRegistry::instance() {
  static const StrategyRegistry registry;
  return registry;
}

const Strategy& StrategyRegistry::strategy(StrategyKind kind) const {
  return strategies_[index_of(kind)];
}

std::string StrategyRegistry::instruction(StrategyKind kind) const {
  switch (kind) {
    case StrategyKind::baseline_paraphrase: return paraphrase_instruction_;
    case StrategyKind::baseline_receptive: return receptive_instruction_;
    case StrategyKind::original:
      throw ConfigError("the original reply has no prompt");
    default: break;
  }
  const Strategy& s = strategy(kind);
  std::string out = template_;
  replace_all(out, "{label}", s.prompt_label);
  replace_all(out, "{display}", s.display_name);
  replace_all(out, "{definition}", s.definition);
  return out;
}

const std::string& strategy_definition(StrategyKind kind) {
  if (!is_reframing_strategy(kind)) {
    throw ConfigError("'" + std::string(to_string(kind)) + "' has no strategy definition");
  }
  return StrategyRegistry::instance().strategy(kind).definition;
}

PromptBundle build_prompt(StrategyKind kind, std::string_view comment, std::string_view reply) {
  const auto& registry = StrategyRegistry::instance();
  PromptBundle bundle;
  bundle.instruction = registry.instruction(kind);
  if (is_reframing_strategy(kind)) {
    for (const auto& ex : registry.exemplars()) {
      bundle.shots.push_back({ex.comment, ex.reply, ex.reframes.at(kind)});
    }
  }
  bundle.target_comment = std::string(comment);
  bundle.target_reply = std::string(reply);
  return bundle;
}

PromptBundle build_prompt(StrategyKind kind, const CommentReplyPair& pair) {
  return build_prompt(kind, pair.comment, pair.reply);
}

PromptBundle with_length_reminder(PromptBundle bundle) {
  bundle.reminder = StrategyRegistry::instance().length_reminder();
  return bundle;
}

std::string user_turn(std::string_view comment, std::string_view reply) {
  std::string out = "Comment: ";
  out.append(comment);
  out.append("\nReply: ");
  out.append(reply);
  return out;
}

std::vector<ChatMessage> to_messages(const PromptBundle& bundle) {
  std::vector<ChatMessage> messages;
  messages.push_back({"system", bundle.instruction});
  for (const auto& shot : bundle.shots) {
    messages.push_back({"user", user_turn(shot.comment, shot.reply)});
    messages.push_back({"assistant", shot.reframe});
  }
  std::string target = user_turn(bundle.target_comment, bundle.target_reply);
  if (!bundle.reminder.empty()) {
    target.append("\n");
    target.append(bundle.reminder);
  }
  messages.push_back({"user", std::move(target)});
  return messages;
}

nlohmann::ordered_json to_json(const std::vector<ChatMessage>& messages) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& m : messages) {
    nlohmann::ordered_json item;
    item["role"] = m.role;
    item["content"] = m.content;
    out.push_back(std::move(item));
  }
  return out;
}

nlohmann::ordered_json registry_dump() {
  const auto& registry = StrategyRegistry::instance();
  nlohmann::ordered_json out;
  out["version"] = registry.version();
  auto strategies = nlohmann::ordered_json::array();
  for (const StrategyKind kind : kGeneratableKinds) {
    const Strategy& s = registry.strategy(kind);
    nlohmann::ordered_json item;
    item["key"] = s.key;
    item["display_name"] = s.display_name;
    if (is_reframing_strategy(kind)) {
      item["prompt_label"] = s.prompt_label;
      item["definition"] = s.definition;
    }
    item["instruction"] = registry.instruction(kind);
    item["shots"] = is_reframing_strategy(kind) ? registry.exemplars().size() : 0;
    strategies.push_back(std::move(item));
  }
  out["strategies"] = std::move(strategies);
  auto exemplars = nlohmann::ordered_json::array();
  for (const auto& ex : registry.exemplars()) {
    nlohmann::ordered_json item;
    item["comment"] = ex.comment;
    item["reply"] = ex.reply;
    nlohmann::ordered_json reframes;
    for (const StrategyKind kind : kReframingStrategies) {
      reframes[std::string(to_string(kind))] = ex.reframes.at(kind);
    }
    item["reframes"] = std::move(reframes);
    exemplars.push_back(std::move(item));
  }
  out["exemplars"] = std::move(exemplars);
  out["length_reminder"] = registry.length_reminder();
  return out;
}

}  // namespace reframe
