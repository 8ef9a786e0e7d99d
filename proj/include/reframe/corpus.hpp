#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace reframe {

enum class Label { agree, disagree, neutral };

std::string_view to_string(Label label);

// Case-insensitive; throws DataError on anything outside the vocabulary.
Label parse_label(std::string_view text);

struct CommentReplyPair {
  std::string id;
  std::string subreddit;
  std::string comment;
  std::string reply;
  Label label = Label::disagree;
  std::optional<double> reply_toxicity;
};

struct FilterConfig {
  std::size_t max_words = 30;
  double toxicity_cutoff = 0.9;
  Label required_label = Label::disagree;
  std::set<std::string> excluded_subreddits{"Brexit"};
  bool apply_toxicity = true;

  // Throws ConfigError when max_words < 1 or the cutoff is outside (0, 1].
  void validate() const;
};

// Rule -> number of pairs removed by that rule. Rules run in the fixed order
// label, length, subreddit, toxicity; a pair is charged to the first rule it
// fails.
struct ExclusionReport {
  std::size_t input = 0;
  std::size_t label = 0;
  std::size_t length = 0;
  std::size_t subreddit = 0;
  std::size_t toxicity = 0;
  std::size_t kept = 0;
};

struct FilterResult {
  std::vector<CommentReplyPair> pairs;
  ExclusionReport report;
};

// Count of maximal non-whitespace runs (Unicode White_Space separators).
std::size_t word_count(std::string_view text);

// Reads line-delimited JSON records. Blank lines are skipped but still count
// toward reported line numbers.
std::vector<CommentReplyPair> load_corpus(const std::filesystem::path& path);
std::vector<CommentReplyPair> parse_corpus(std::istream& in);

void write_corpus(const std::filesystem::path& path,
                  std::span<const CommentReplyPair> pairs);

// Toxicity is only required for pairs that survive the first three rules.
FilterResult filter_pairs(std::span<const CommentReplyPair> pairs,
                          const FilterConfig& config);

// Sums the per-rule counts of two successive filter passes; `input` comes from
// the first pass and `kept` from the second.
ExclusionReport chain(const ExclusionReport& first, const ExclusionReport& second);

void write_exclusion_report(const std::filesystem::path& path,
                            const ExclusionReport& report);

}  // namespace reframe
