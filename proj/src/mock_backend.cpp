#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "reframe/gateway.hpp"
#include "reframe/hash.hpp"
#include "reframe/text.hpp"

// Deterministic offline stand-ins for the four capabilities. They operate on
// the same provider-neutral payloads as the HTTP codecs.
namespace reframe {

namespace {

using nlohmann::json;

struct PhraseBank {
  std::string_view marker;  // substring of the instruction selecting this bank
  std::array<std::string_view, 3> phrases;
};

// Checked in order; the first marker found in the instruction wins.
constexpr std::array<PhraseBank, 8> kBanks = {{
    {"using hedging", {"I think", "It might be that", "Perhaps"}},
    {"using acknowledgement",
     {"I understand your point, but", "I see where you're coming from, but",
      "I understand your frustration, but"}},
    {"using elaboration",
     {"It sounds like you're saying otherwise, but", "Are you suggesting that? I think",
      "It sounds like you mean something else, but"}},
    {"using grounding",
     {"I also think this matters, but", "We both believe this is important, but",
      "I also believe we want the same thing, but"}},
    {"using gratitude",
     {"Thank you for sharing your view, but", "Thank you for your comment, but",
      "I appreciate you bringing this up, but"}},
    {"using compromise and agreement",
     {"I agree that this is important, but", "I agree with part of that, but",
      "You make a fair point, but"}},
    {"Paraphrase", {"In other words,", "Put simply,", "Basically,"}},
    {"more receptive",
     {"I hear you, but", "I respect your view, but", "I see your perspective, but"}},
}};

std::uint64_t stable_hash(std::uint64_t seed, std::string_view text) {
  const std::string digest = sha256_hex(std::to_string(seed) + '\x1f' + std::string(text));
  return std::stoull(digest.substr(0, 15), nullptr, 16);
}

std::string truncate_words(std::string_view text, std::size_t limit) {
  const auto words = text::split_whitespace(text);
  std::string out;
  for (std::size_t i = 0; i < words.size() && i < limit; ++i) {
    if (i) out.push_back(' ');
    out.append(words[i]);
  }
  return out;
}

json mock_chat(std::uint64_t seed, const json& payload) {
  const auto& messages = payload.at("messages");
  std::string instruction;
  std::string target;
  for (const auto& m : messages) {
    if (m.at("role") == "system") instruction = m.at("content").get<std::string>();
    if (m.at("role") == "user") target = m.at("content").get<std::string>();
  }

  // Replay: a target identical to one of the shots gets that shot's reframe.
  for (std::size_t i = 0; i + 1 < messages.size(); ++i) {
    if (messages[i].at("role") != "user" || messages[i + 1].at("role") != "assistant") continue;
    const std::string shot = messages[i].at("content").get<std::string>();
    if (target == shot || target.rfind(shot + "\n", 0) == 0) {
      return json{{"text", messages[i + 1].at("content").get<std::string>()}};
    }
  }

  std::string reply = target;
  const bool reminded = [&] {
    const auto reply_at = target.find("\nReply: ");
    if (reply_at != std::string::npos) reply = target.substr(reply_at + 8);
    const auto reminder_at = reply.find('\n');
    if (reminder_at == std::string::npos) return false;
    reply.erase(reminder_at);
    return true;
  }();

  std::string_view opener = "Well,";
  for (const auto& bank : kBanks) {
    if (instruction.find(bank.marker) != std::string::npos) {
      opener = bank.phrases[stable_hash(seed, target) % bank.phrases.size()];
      break;
    }
  }
  std::string text = std::string(opener) + " " + std::string(text::trim(reply));
  if (reminded) text = truncate_words(text, 30);
  return json{{"text", text}};
}

json mock_embedding(const json& payload) {
  const std::string input = payload.at("text").get<std::string>();
  std::vector<double> histogram(26, 0.0);
  for (const char c : input) {
    if (c >= 'a' && c <= 'z') histogram[c - 'a'] += 1.0;
    if (c >= 'A' && c <= 'Z') histogram[c - 'A'] += 1.0;
  }
  double norm = 0.0;
  for (const double v : histogram) norm += v * v;
  norm = std::sqrt(norm);
  if (norm > 0.0) {
    for (double& v : histogram) v /= norm;
  }
  return json{{"vector", histogram}};
}

struct NegationSplit {
  std::multiset<std::string> content;
  std::size_t negations = 0;
};

NegationSplit split_negations(std::string_view input) {
  NegationSplit out;
  for (const auto raw : text::split_whitespace(input)) {
    std::string token = text::lowercase(text::strip_punctuation(raw));
    if (token.empty()) continue;
    if (token == "not" || token == "no" || token == "never") {
      ++out.negations;
      continue;
    }
    if (token.size() > 3 && token.ends_with("n't")) {
      ++out.negations;
      token.erase(token.size() - 3);
    }
    out.content.insert(token);
  }
  return out;
}

json mock_nli(const json& payload) {
  const auto premise = split_negations(payload.at("premise").get<std::string>());
  const auto hypothesis = split_negations(payload.at("hypothesis").get<std::string>());
  std::string label = "neutral";
  if (premise.content == hypothesis.content) {
    label = (premise.negations % 2 == hypothesis.negations % 2) ? "entailment" : "contradiction";
  } else {
    std::size_t shared = 0;
    for (const auto& token : hypothesis.content) shared += premise.content.count(token) ? 1 : 0;
    if (!hypothesis.content.empty() &&
        static_cast<double>(shared) / static_cast<double>(hypothesis.content.size()) >= 0.8 &&
        premise.negations % 2 == hypothesis.negations % 2) {
      label = "entailment";
    }
  }
  json labels = json::array({"entailment", "neutral", "contradiction"});
  json scores = json::array();
  for (const auto& l : labels) scores.push_back(l == label ? 0.8 : 0.1);
  return json{{"labels", labels}, {"scores", scores}};
}

json mock_toxicity(const ProviderConfig& config, const json& payload) {
  if (config.mock_toxicity) return json{{"score", *config.mock_toxicity}};
  static const std::set<std::string> kLexicon = {"idiot", "idiots", "stupid", "dumb",
                                                 "moron", "fuck",   "fucking", "shit",
                                                 "bullshit", "hate", "racist", "thugs"};
  std::size_t hits = 0;
  for (const auto raw : text::split_whitespace(payload.at("text").get<std::string>())) {
    if (kLexicon.contains(text::lowercase(text::strip_punctuation(raw)))) ++hits;
  }
  const double score = std::min(0.99, 0.02 + 0.3 * static_cast<double>(hits));
  return json{{"score", score}};
}

class MockBackend final : public Backend {
 public:
  explicit MockBackend(ProviderConfig config) : config_(std::move(config)) {}

  json call(Capability capability, const json& payload) override {
    switch (capability) {
      case Capability::chat: return mock_chat(config_.mock_seed, payload);
      case Capability::embedding: return mock_embedding(payload);
      case Capability::nli: return mock_nli(payload);
      case Capability::toxicity: return mock_toxicity(config_, payload);
    }
    throw ConfigError("unknown capability");
  }

  std::string_view name() const override { return "mock"; }

 private:
  ProviderConfig config_;
};

}  // namespace

std::shared_ptr<Backend> make_mock_backend(const ProviderConfig& config) {
  return std::make_shared<MockBackend>(config);
}

}  // namespace reframe
