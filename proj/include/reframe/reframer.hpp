#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "reframe/corpus.hpp"
#include "reframe/gateway.hpp"
#include "reframe/strategies.hpp"

namespace reframe {

inline constexpr std::size_t kMaxReframeWords = 30;

struct Reframe {
  std::string pair_id;
  StrategyKind strategy = StrategyKind::original;
  std::string text;
  std::size_t word_count = 0;
  bool over_length = false;
  std::string model;
  std::string hash;  // cache key of the request that produced `text`
  int attempts = 1;  // 2 when the length reminder was appended
  std::string created_at;  // in-memory only; not persisted to reframe files
};

// The untouched reply, carried as a Reframe of kind original.
Reframe original_as_reframe(const CommentReplyPair& pair);

// One chat call; a single regeneration with the length reminder when the first
// answer exceeds kMaxReframeWords. The final text is kept either way.
Reframe generate_reframe(const CommentReplyPair& pair, StrategyKind kind,
                         ChatClient& client);

// The exact prompt that produced `reframe`.
PromptBundle reconstruct_prompt(const Reframe& reframe, const CommentReplyPair& pair);

struct GenerationFailure {
  std::string pair_id;
  StrategyKind strategy;
  std::string message;
};

struct KindProgress {
  StrategyKind strategy;
  std::size_t completed = 0;
  std::size_t resumed = 0;
  std::size_t over_length = 0;
  std::size_t failed = 0;
};

struct GenerationReport {
  std::vector<Reframe> reframes;  // ordered by (pair index, kind order)
  std::vector<GenerationFailure> failures;
  std::vector<KindProgress> per_kind;
};

struct GenerationOptions {
  int parallelism = 1;
  // Reframes from an earlier run; matching (pair_id, kind) items are reused.
  std::vector<Reframe> existing;
  // Called under a lock for every newly generated reframe.
  std::function<void(const Reframe&)> on_complete;
};

GenerationReport generate_all(std::span<const CommentReplyPair> pairs,
                              std::span<const StrategyKind> kinds,
                              ChatClient& client,
                              const GenerationOptions& options = {});

nlohmann::ordered_json to_json(const Reframe& reframe);
Reframe reframe_from_json(const nlohmann::json& j);

std::vector<Reframe> load_reframes(const std::filesystem::path& path);
void write_reframes(const std::filesystem::path& path, std::span<const Reframe> reframes);

}  // namespace reframe
