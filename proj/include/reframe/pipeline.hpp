#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "reframe/corpus.hpp"
#include "reframe/gateway.hpp"
#include "reframe/strategies.hpp"

namespace reframe {

std::string_view tool_version();

struct RunPaths {
  std::filesystem::path raw_corpus;     // ingest input
  std::filesystem::path corpus;         // filtered corpus
  std::filesystem::path reframes;
  std::filesystem::path receptiveness;  // annotation tables
  std::filesystem::path reasonability;
  std::filesystem::path cache;
  std::filesystem::path output = "out";
};

// Config file (JSON):
//   {"paths": {...RunPaths keys...},
//    "providers": {"chat": {...}, "embedding": {...}, "nli": {...},
//                  "toxicity": {...}},
//    "filter": {"max_words": 30, "toxicity_cutoff": 0.9,
//               "excluded_subreddits": ["Brexit"]},
//    "strategies": "all" | ["hedging", ...],
//    "seed": 0, "parallelism": 4, "trigram_top": 25, "reml": false}
// Relative paths resolve against the config file's directory.
struct RunConfig {
  RunPaths paths;
  std::map<Capability, ProviderConfig> providers;
  FilterConfig filter;
  std::vector<StrategyKind> strategies{kGeneratableKinds.begin(), kGeneratableKinds.end()};
  std::uint64_t seed = 0;
  int parallelism = 4;
  std::size_t trigram_top = 25;
  bool reml = false;

  static RunConfig from_json(const nlohmann::json& j,
                             const std::filesystem::path& base_dir = {});
  static RunConfig load(const std::filesystem::path& path);
  nlohmann::ordered_json to_json() const;

  // Throws ConfigError when the capability has no provider section. A
  // provider without a cache_dir inherits <paths.cache>/<capability>.
  ProviderConfig provider(Capability capability) const;

  // Every provider switched to its deterministic mock.
  static RunConfig offline_defaults();
};

enum class Stage { ingest, generate, validate, trigrams, score, analyze };

std::string_view to_string(Stage stage);
Stage parse_stage(std::string_view text);

inline constexpr std::array<Stage, 6> kAllStages = {
    Stage::ingest, Stage::generate, Stage::validate,
    Stage::trigrams, Stage::score, Stage::analyze};

enum class AnnotationKind { receptiveness, reasonability };
enum class AnalysisModel { receptiveness, toxicity_interaction };

struct StageOutcome {
  Stage stage;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
  std::vector<std::string> notes;
};

StageOutcome run_ingest(const RunConfig& config);
StageOutcome run_generate(const RunConfig& config);
StageOutcome run_validate(const RunConfig& config);
StageOutcome run_trigrams(const RunConfig& config);
StageOutcome run_score(const RunConfig& config, std::optional<AnnotationKind> kind = {});
StageOutcome run_analyze(const RunConfig& config, std::optional<AnalysisModel> model = {});

struct ReportBundle {
  std::vector<StageOutcome> stages;
  std::filesystem::path manifest;
};

// Runs the stages in order and writes manifest.json (tool version, config,
// input and output digests) into the output directory.
ReportBundle run_pipeline(const RunConfig& config, std::span<const Stage> stages);

std::filesystem::path write_manifest(const RunConfig& config,
                                     std::span<const StageOutcome> stages);

}  // namespace reframe
