#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reframe/strategies.hpp"

namespace reframe {

inline constexpr std::size_t kQuestionCount = 8;
inline constexpr std::size_t kFactorCount = 4;
inline constexpr int kLikertMin = -3;
inline constexpr int kLikertMax = 3;

// Answers ordered F1a, F1b, F2a, F2b, F3a, F3b, F4a, F4b. -3 means the original
// reply is much more receptive on the raw scale.
struct ReceptivenessRecord {
  std::string pair_id;
  StrategyKind variant = StrategyKind::hedging;
  std::string annotator_id;
  std::array<int, kQuestionCount> answers{};
};

enum class Polarity { negative, positive };

// Negative questions are reverse coded.
inline constexpr std::array<Polarity, kQuestionCount> kQuestionPolarity = {
    Polarity::negative, Polarity::positive,  // F1 emotion
    Polarity::negative, Polarity::positive,  // F2 curiosity
    Polarity::negative, Polarity::negative,  // F3 bias
    Polarity::negative, Polarity::negative,  // F4 openness
};

inline constexpr std::array<const char*, kFactorCount> kFactorNames = {
    "emotion", "curiosity", "bias", "openness"};

using CodedAnswers = std::array<double, kQuestionCount>;

// After coding, +3 always means the reframed reply is much more receptive.
CodedAnswers code_answers(const ReceptivenessRecord& record);

struct ReceptivenessScore {
  double index = 0.0;
  std::array<double, kFactorCount> factors{};
};

ReceptivenessScore receptiveness_score(const ReceptivenessRecord& record);

// Throws DataError unless every answer is in [-3, 3] and the variant is not
// original.
void validate(const ReceptivenessRecord& record);

struct ReasonabilityRecord {
  std::string pair_id;
  StrategyKind variant = StrategyKind::original;
  std::string annotator_id;
  int score = 0;  // 0..4
};

void validate(const ReasonabilityRecord& record);

// Interval-metric Krippendorff's alpha. Each unit holds the values assigned
// to it by different annotators; units with fewer than two values are not
// pairable and are ignored. Throws DataError with fewer than two pairable
// units. Returns 1 when there is no expected disagreement.
double krippendorff_alpha_interval(std::span<const std::vector<double>> units);

enum class AlphaUnit {
  record_index,  // unit = (pair, variant), value = per-record index
  question,      // unit = (pair, variant, question), value = coded answer
};

std::string_view to_string(AlphaUnit unit);

double receptiveness_alpha(std::span<const ReceptivenessRecord> records, AlphaUnit unit);

struct ReasonabilitySummary {
  StrategyKind variant;
  std::size_t items = 0;
  double mean = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  // Paired comparison against the original over shared items; absent for the
  // original itself.
  std::optional<double> mean_diff;
  std::optional<double> t;
  std::optional<double> df;
  std::optional<double> p;
  std::size_t paired_items = 0;
};

// Scores are first averaged over annotators per (pair, variant) item.
std::vector<ReasonabilitySummary> reasonability_summary(
    std::span<const ReasonabilityRecord> records);

// Tabular import: header row naming pair_id, variant, annotator_id and either
// q1..q8 or score. Comma or tab separated, double-quoted fields allowed.
std::vector<ReceptivenessRecord> load_receptiveness(const std::filesystem::path& path);
std::vector<ReceptivenessRecord> parse_receptiveness(std::istream& in);
std::vector<ReasonabilityRecord> load_reasonability(const std::filesystem::path& path);
std::vector<ReasonabilityRecord> parse_reasonability(std::istream& in);

}  // namespace reframe
