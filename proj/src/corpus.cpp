#include "reframe/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <unordered_map>

#include <json.hpp>

#include "reframe/error.hpp"
#include "reframe/text.hpp"

namespace reframe {

namespace {

using nlohmann::json;

std::string normalize_subreddit(std::string_view name) {
  std::string lower = text::lowercase(text::trim(name));
  if (lower.rfind("r/", 0) == 0) lower.erase(0, 2);
  return lower;
}

std::string require_string(const json& record, const char* field, std::size_t line) {
  const auto it = record.find(field);
  if (it == record.end()) {
    throw DataError("line " + std::to_string(line) + ": missing field '" + field + "'",
                    line);
  }
  if (it->is_string()) return it->get<std::string>();
  if (std::string_view(field) == "id" && it->is_number_integer()) {
    return std::to_string(it->get<long long>());
  }
  throw DataError("line " + std::to_string(line) + ": field '" + field +
                      "' must be a string",
                  line);
}

CommentReplyPair parse_record(const std::string& raw, std::size_t line) {
  json record;
  try {
    record = json::parse(raw);
  } catch (const json::parse_error& e) {
    throw DataError("line " + std::to_string(line) + ": malformed JSON (" + e.what() + ")",
                    line);
  }
  if (!record.is_object()) {
    throw DataError("line " + std::to_string(line) + ": record is not an object", line);
  }

  CommentReplyPair pair;
  pair.id = require_string(record, "id", line);
  pair.subreddit = require_string(record, "subreddit", line);
  pair.comment = require_string(record, "comment", line);
  pair.reply = require_string(record, "reply", line);
  try {
    pair.label = parse_label(require_string(record, "label", line));
  } catch (const DataError& e) {
    throw DataError("line " + std::to_string(line) + ": " + e.what(), line);
  }

  if (pair.id.empty()) throw DataError("line " + std::to_string(line) + ": empty id", line);
  if (text::trim(pair.comment).empty() || text::trim(pair.reply).empty()) {
    throw DataError("line " + std::to_string(line) + ": comment and reply must be non-empty",
                    line);
  }

  if (const auto it = record.find("toxicity"); it != record.end() && !it->is_null()) {
    if (!it->is_number()) {
      throw DataError("line " + std::to_string(line) + ": toxicity must be a number", line);
    }
    const double score = it->get<double>();
    if (!(score >= 0.0 && score <= 1.0)) {
      throw DataError("line " + std::to_string(line) + ": toxicity outside [0, 1]", line);
    }
    pair.reply_toxicity = score;
  }
  return pair;
}

}  // namespace

std::string_view to_string(Label label) {
  switch (label) {
    case Label::agree: return "agree";
    case Label::disagree: return "disagree";
    case Label::neutral: return "neutral";
  }
  return "unknown";
}

Label parse_label(std::string_view raw) {
  const std::string value = text::lowercase(text::trim(raw));
  if (value == "agree") return Label::agree;
  if (value == "disagree") return Label::disagree;
  if (value == "neutral") return Label::neutral;
  throw DataError("unknown label '" + std::string(raw) + "'");
}

void FilterConfig::validate() const {
  if (max_words < 1) throw ConfigError("filter max_words must be at least 1");
  if (!(toxicity_cutoff > 0.0 && toxicity_cutoff <= 1.0)) {
    throw ConfigError("filter toxicity_cutoff must lie in (0, 1]");
  }
}

std::size_t word_count(std::string_view text) { return text::split_whitespace(text).size(); }

std::vector<CommentReplyPair> parse_corpus(std::istream& in) {
  std::vector<CommentReplyPair> pairs;
  std::unordered_map<std::string, std::size_t> seen;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (text::trim(raw).empty()) continue;
    CommentReplyPair pair = parse_record(raw, line);
    const auto [it, inserted] = seen.emplace(pair.id, line);
    if (!inserted) {
      throw DataError("line " + std::to_string(line) + ": duplicate id '" + pair.id +
                          "' (first seen on line " + std::to_string(it->second) + ")",
                      line);
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

std::vector<CommentReplyPair> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("corpus file not found: " + path.string());
  try {
    return parse_corpus(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what(), e.line());
  }
}

void write_corpus(const std::filesystem::path& path, std::span<const CommentReplyPair> pairs) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (const auto& pair : pairs) {
    nlohmann::ordered_json j;
    j["id"] = pair.id;
    j["subreddit"] = pair.subreddit;
    j["comment"] = pair.comment;
    j["reply"] = pair.reply;
    j["label"] = to_string(pair.label);
    if (pair.reply_toxicity) j["toxicity"] = *pair.reply_toxicity;
    out << j.dump() << '\n';
  }
}

FilterResult filter_pairs(std::span<const CommentReplyPair> pairs, const FilterConfig& config) {
  config.validate();
  std::vector<std::string> excluded;
  for (const auto& name : config.excluded_subreddits) excluded.push_back(normalize_subreddit(name));

  FilterResult result;
  result.report.input = pairs.size();
  for (const auto& pair : pairs) {
    if (pair.label != config.required_label) {
      ++result.report.label;
      continue;
    }
    if (word_count(pair.comment) > config.max_words ||
        word_count(pair.reply) > config.max_words) {
      ++result.report.length;
      continue;
    }
    const std::string subreddit = normalize_subreddit(pair.subreddit);
    if (std::find(excluded.begin(), excluded.end(), subreddit) != excluded.end()) {
      ++result.report.subreddit;
      continue;
    }
    if (config.apply_toxicity) {
      if (!pair.reply_toxicity) {
        throw DataError("pair '" + pair.id + "' has no toxicity score; score replies first");
      }
      if (*pair.reply_toxicity > config.toxicity_cutoff) {
        ++result.report.toxicity;
        continue;
      }
    }
    result.pairs.push_back(pair);
  }
  result.report.kept = result.pairs.size();
  return result;
}

ExclusionReport chain(const ExclusionReport& first, const ExclusionReport& second) {
  ExclusionReport out;
  out.input = first.input;
  out.label = first.label + second.label;
  out.length = first.length + second.length;
  out.subreddit = first.subreddit + second.subreddit;
  out.toxicity = first.toxicity + second.toxicity;
  out.kept = second.kept;
  return out;
}

void write_exclusion_report(const std::filesystem::path& path, const ExclusionReport& report) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "rule\tcount\n"
      << "input\t" << report.input << '\n'
      << "label\t" << report.label << '\n'
      << "length\t" << report.length << '\n'
      << "subreddit\t" << report.subreddit << '\n'
      << "toxicity\t" << report.toxicity << '\n'
      << "kept\t" << report.kept << '\n';
}

}  // namespace reframe
