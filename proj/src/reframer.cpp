#include "reframe/reframer.hpp"

#include <fstream>
#include <map>
#include <mutex>
#include <optional>

#include "reframe/error.hpp"

namespace reframe {

namespace {

Reframe make_reframe(const CommentReplyPair& pair, StrategyKind kind, const Completion& c,
                     const std::string& model, int attempts) {
  Reframe r;
  r.pair_id = pair.id;
  r.strategy = kind;
  r.text = c.text;
  r.word_count = word_count(c.text);
  r.over_length = r.word_count > kMaxReframeWords;
  r.model = model;
  r.hash = c.key;
  r.attempts = attempts;
  r.created_at = c.created_at;
  return r;
}

}  // namespace

Reframe original_as_reframe(const CommentReplyPair& pair) {
  Reframe r;
  r.pair_id = pair.id;
  r.strategy = StrategyKind::original;
  r.text = pair.reply;
  r.word_count = word_count(pair.reply);
  r.over_length = r.word_count > kMaxReframeWords;
  return r;
}

Reframe generate_reframe(const CommentReplyPair& pair, StrategyKind kind, ChatClient& client) {
  if (kind == StrategyKind::original) {
    throw ConfigError("cannot generate a reframe of kind original");
  }
  try {
    const PromptBundle bundle = build_prompt(kind, pair);
    Reframe r = make_reframe(pair, kind, client.complete(bundle), client.model(), 1);
    if (!r.over_length) return r;
    return make_reframe(pair, kind, client.complete(with_length_reminder(bundle)),
                        client.model(), 2);
  } catch (const ProviderError& e) {
    throw ProviderError(e.kind(), "pair " + pair.id + " / " + std::string(to_string(kind)) +
                                      ": " + e.what());
  } catch (const DataError& e) {
    throw DataError("pair " + pair.id + " / " + std::string(to_string(kind)) + ": " + e.what());
  }
}

PromptBundle reconstruct_prompt(const Reframe& reframe, const CommentReplyPair& pair) {
  if (reframe.pair_id != pair.id) {
    throw DataError("reframe belongs to pair '" + reframe.pair_id + "', not '" + pair.id + "'");
  }
  PromptBundle bundle = build_prompt(reframe.strategy, pair);
  if (reframe.attempts > 1) bundle = with_length_reminder(std::move(bundle));
  return bundle;
}

GenerationReport generate_all(std::span<const CommentReplyPair> pairs,
                              std::span<const StrategyKind> kinds, ChatClient& client,
                              const GenerationOptions& options) {
  for (const StrategyKind kind : kinds) {
    if (kind == StrategyKind::original) {
      throw ConfigError("original is not a generatable strategy");
    }
  }

  std::map<std::pair<std::string, StrategyKind>, const Reframe*> previous;
  for (const auto& r : options.existing) previous[{r.pair_id, r.strategy}] = &r;

  const std::size_t total = pairs.size() * kinds.size();
  std::vector<std::optional<Reframe>> slots(total);
  std::vector<std::optional<std::string>> errors(total);
  std::mutex callback_mutex;

  run_bounded(total, options.parallelism, [&](std::size_t i) {
    const CommentReplyPair& pair = pairs[i / kinds.size()];
    const StrategyKind kind = kinds[i % kinds.size()];
    if (const auto it = previous.find({pair.id, kind}); it != previous.end()) {
      slots[i] = *it->second;
      return;
    }
    try {
      slots[i] = generate_reframe(pair, kind, client);
    } catch (const ConfigError&) {
      throw;
    } catch (const ProviderError& e) {
      if (e.kind() == ProviderErrorKind::auth) throw;
      errors[i] = e.what();
      return;
    } catch (const DataError& e) {
      errors[i] = e.what();
      return;
    }
    if (options.on_complete) {
      std::lock_guard lock(callback_mutex);
      options.on_complete(*slots[i]);
    }
  });

  GenerationReport report;
  for (const StrategyKind kind : kinds) report.per_kind.push_back({kind});
  for (std::size_t i = 0; i < total; ++i) {
    const std::size_t k = i % kinds.size();
    KindProgress& progress = report.per_kind[k];
    if (slots[i]) {
      const bool resumed = previous.contains({slots[i]->pair_id, slots[i]->strategy});
      ++progress.completed;
      if (resumed) ++progress.resumed;
      if (slots[i]->over_length) ++progress.over_length;
      report.reframes.push_back(std::move(*slots[i]));
    } else {
      ++progress.failed;
      report.failures.push_back({pairs[i / kinds.size()].id, kinds[k], *errors[i]});
    }
  }
  return report;
}

nlohmann::ordered_json to_json(const Reframe& r) {
  nlohmann::ordered_json j;
  j["pair_id"] = r.pair_id;
  j["strategy"] = to_string(r.strategy);
  j["text"] = r.text;
  j["word_count"] = r.word_count;
  j["over_length"] = r.over_length;
  j["model"] = r.model;
  j["hash"] = r.hash;
  j["attempts"] = r.attempts;
  return j;
}

Reframe reframe_from_json(const nlohmann::json& j) {
  Reframe r;
  try {
    r.pair_id = j.at("pair_id").get<std::string>();
    r.strategy = parse_strategy(j.at("strategy").get<std::string>());
    r.text = j.at("text").get<std::string>();
    r.model = j.value("model", std::string());
    r.hash = j.value("hash", std::string());
    r.attempts = j.value("attempts", 1);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed reframe record: ") + e.what());
  }
  if (r.text.empty()) throw DataError("reframe for pair '" + r.pair_id + "' has empty text");
  // Derived fields are recomputed so stored flags cannot drift from the text.
  r.word_count = word_count(r.text);
  r.over_length = r.word_count > kMaxReframeWords;
  return r;
}

std::vector<Reframe> load_reframes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("reframe file not found: " + path.string());
  std::vector<Reframe> out;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(reframe_from_json(nlohmann::json::parse(raw)));
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(path.string() + ": line " + std::to_string(line) + ": " + e.what(), line);
    } catch (const DataError& e) {
      throw DataError(path.string() + ": line " + std::to_string(line) + ": " + e.what(), line);
    }
  }
  return out;
}

void write_reframes(const std::filesystem::path& path, std::span<const Reframe> reframes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (const auto& r : reframes) out << to_json(r).dump() << '\n';
}

}  // namespace reframe
