#include "reframe/gateway.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>
#include <unistd.h>

#include "reframe/hash.hpp"
#include "reframe/text.hpp"

namespace reframe {

namespace {

using nlohmann::json;

const std::set<std::string>& provider_keys() {
  static const std::set<std::string> keys = {
      "endpoint",    "credential_env", "model",         "timeout_seconds",
      "max_retries", "parallelism",    "cache_dir",     "mock",
      "mock_seed",   "mock_toxicity",  "backoff_base_seconds", "backoff_max_seconds"};
  return keys;
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Releases a semaphore slot on scope exit.
class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<>& sem) : sem_(sem) { sem_.acquire(); }
  ~SlotGuard() { sem_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<>& sem_;
};

}  // namespace

std::string_view to_string(Capability capability) {
  switch (capability) {
    case Capability::chat: return "chat";
    case Capability::embedding: return "embedding";
    case Capability::nli: return "nli";
    case Capability::toxicity: return "toxicity";
  }
  return "unknown";
}

std::string_view to_string(NliLabel label) {
  switch (label) {
    case NliLabel::entailment: return "entailment";
    case NliLabel::neutral: return "neutral";
    case NliLabel::contradiction: return "contradiction";
  }
  return "unknown";
}

void ProviderConfig::validate() const {
  if (!(timeout_seconds > 0.0)) throw ConfigError("provider timeout must be positive");
  if (max_retries < 0) throw ConfigError("provider max_retries must be non-negative");
  if (parallelism < 1) throw ConfigError("provider parallelism must be at least 1");
  if (backoff_base_seconds < 0.0 || backoff_max_seconds < 0.0) {
    throw ConfigError("provider backoff delays must be non-negative");
  }
  if (mock_toxicity && !(*mock_toxicity >= 0.0 && *mock_toxicity <= 1.0)) {
    throw ConfigError("mock_toxicity must lie in [0, 1]");
  }
  if (!mock && endpoint.empty()) throw ConfigError("provider endpoint is required");
}

ProviderConfig ProviderConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("provider config must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!provider_keys().contains(key)) throw ConfigError("unknown provider key '" + key + "'");
  }
  ProviderConfig c;
  try {
    c.endpoint = j.value("endpoint", c.endpoint);
    c.credential_env = j.value("credential_env", c.credential_env);
    c.model = j.value("model", c.model);
    c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.parallelism = j.value("parallelism", c.parallelism);
    c.cache_dir = j.value("cache_dir", std::string());
    c.mock = j.value("mock", c.mock);
    c.mock_seed = j.value("mock_seed", c.mock_seed);
    if (j.contains("mock_toxicity") && !j["mock_toxicity"].is_null()) {
      c.mock_toxicity = j["mock_toxicity"].get<double>();
    }
    c.backoff_base_seconds = j.value("backoff_base_seconds", c.backoff_base_seconds);
    c.backoff_max_seconds = j.value("backoff_max_seconds", c.backoff_max_seconds);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid provider config: ") + e.what());
  }
  if (c.mock && c.model.empty()) c.model = "mock";
  c.validate();
  return c;
}

nlohmann::ordered_json ProviderConfig::to_json() const {
  nlohmann::ordered_json j;
  j["endpoint"] = endpoint;
  j["credential_env"] = credential_env;
  j["model"] = model;
  j["timeout_seconds"] = timeout_seconds;
  j["max_retries"] = max_retries;
  j["parallelism"] = parallelism;
  j["cache_dir"] = cache_dir.string();
  j["mock"] = mock;
  j["mock_seed"] = mock_seed;
  j["mock_toxicity"] = mock_toxicity ? json(*mock_toxicity) : json(nullptr);
  j["backoff_base_seconds"] = backoff_base_seconds;
  j["backoff_max_seconds"] = backoff_max_seconds;
  return j;
}

// --- cache ---------------------------------------------------------------

std::string cache_key(Capability capability, std::string_view model, std::string_view backend,
                      const json& payload) {
  json key;
  key["backend"] = backend;
  key["capability"] = to_string(capability);
  key["model"] = model;
  key["payload"] = payload;
  return sha256_hex(key.dump());
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path ResponseCache::entry_path(const std::string& key) const {
  return dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<ResponseCache::Entry> ResponseCache::lookup(const std::string& key) {
  {
    std::lock_guard lock(mutex_);
    if (const auto it = memory_.find(key); it != memory_.end()) return it->second;
  }
  if (dir_.empty()) return std::nullopt;
  std::ifstream in(entry_path(key), std::ios::binary);
  if (!in) return std::nullopt;
  try {
    const json stored = json::parse(in);
    if (stored.at("key").get<std::string>() != key) return std::nullopt;
    Entry entry{stored.at("value"), stored.value("created_at", std::string())};
    std::lock_guard lock(mutex_);
    memory_.emplace(key, entry);
    return entry;
  } catch (const json::exception&) {
    // Unreadable entries are treated as misses and overwritten.
    return std::nullopt;
  }
}

void ResponseCache::store(const std::string& key, const Entry& entry) {
  {
    std::lock_guard lock(mutex_);
    memory_[key] = entry;
  }
  if (dir_.empty()) return;
  const auto path = entry_path(key);
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw ConfigError("cannot create cache directory " + path.parent_path().string());

  nlohmann::ordered_json stored;
  stored["key"] = key;
  stored["created_at"] = entry.created_at;
  stored["value"] = entry.value;

  std::ostringstream tmp_name;
  tmp_name << path.filename().string() << ".tmp." << ::getpid() << '.' << tmp_counter_++;
  const auto tmp = path.parent_path() / tmp_name.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write cache entry " + tmp.string());
    out << stored.dump() << '\n';
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw ConfigError("cannot move cache entry into place: " + path.string());
}

// --- executor ------------------------------------------------------------

RequestExecutor::RequestExecutor(ProviderConfig config, std::shared_ptr<Backend> backend)
    : config_(std::move(config)),
      backend_(std::move(backend)),
      cache_(config_.cache_dir),
      slots_(config_.parallelism),
      rng_(config_.mock_seed ^ 0x5bd1e995ULL) {
  config_.validate();
}

RequestExecutor::Result RequestExecutor::run(Capability capability, const json& payload,
                                             const Validator& validate) {
  const std::string key = cache_key(capability, config_.model, backend_->name(), payload);
  if (auto hit = cache_.lookup(key)) {
    if (validate) validate(hit->value);
    return {std::move(hit->value), key, true, std::move(hit->created_at)};
  }

  json value;
  {
    SlotGuard slot(slots_);
    value = call_with_retry(capability, payload);
  }
  if (validate) validate(value);
  ResponseCache::Entry entry{value, utc_now()};
  cache_.store(key, entry);
  return {std::move(value), key, false, std::move(entry.created_at)};
}

double RequestExecutor::backoff_delay(int attempt) {
  const double raw = config_.backoff_base_seconds * std::pow(2.0, attempt);
  const double capped = std::min(raw, config_.backoff_max_seconds);
  std::uniform_real_distribution<double> jitter(0.5, 1.0);
  std::lock_guard lock(rng_mutex_);
  return capped * jitter(rng_);
}

json RequestExecutor::call_with_retry(Capability capability, const json& payload) {
  std::string last_error;
  bool last_was_transport = false;
  const int attempts = config_.max_retries + 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    try {
      ++backend_calls_;
      return backend_->call(capability, payload);
    } catch (const RetryableError& e) {
      last_error = e.what();
      last_was_transport = e.transport();
    }
    if (attempt + 1 < attempts) {
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff_delay(attempt)));
    }
  }
  const std::string message = std::string(to_string(capability)) + " request failed after " +
                              std::to_string(attempts) + " attempt(s): " + last_error;
  throw ProviderError(
      last_was_transport ? ProviderErrorKind::network : ProviderErrorKind::retry_exhausted,
      message);
}

std::shared_ptr<RequestExecutor> make_executor(const ProviderConfig& config,
                                               std::shared_ptr<Transport> transport) {
  config.validate();
  std::shared_ptr<Backend> backend;
  if (config.mock) {
    backend = make_mock_backend(config);
  } else {
    if (!transport) transport = make_http_transport();
    backend = make_http_backend(config, std::move(transport));
  }
  return std::make_shared<RequestExecutor>(config, std::move(backend));
}

// --- clients -------------------------------------------------------------

ChatClient::ChatClient(std::shared_ptr<RequestExecutor> executor, SamplingParams sampling)
    : executor_(std::move(executor)), sampling_(sampling) {}

json ChatClient::payload(const PromptBundle& bundle) const {
  json p;
  p["messages"] = to_json(to_messages(bundle));
  p["temperature"] = sampling_.temperature;
  p["max_tokens"] = sampling_.max_tokens;
  p["n"] = sampling_.n;
  return p;
}

Completion ChatClient::complete(const PromptBundle& bundle) {
  if (bundle.instruction.empty() || text::trim(bundle.target_reply).empty()) {
    throw DataError("chat prompt bundle is empty");
  }
  auto result = executor_->run(Capability::chat, payload(bundle), [](const json& v) {
    const auto it = v.find("text");
    if (it == v.end() || !it->is_string()) {
      throw ProviderError(ProviderErrorKind::parse, "chat result has no text");
    }
    if (text::trim(it->get_ref<const std::string&>()).empty()) {
      throw ProviderError(ProviderErrorKind::refusal, "provider returned an empty completion");
    }
  });
  Completion c;
  c.text = std::string(text::trim(result.value.at("text").get_ref<const std::string&>()));
  c.key = std::move(result.key);
  c.cached = result.cached;
  c.created_at = std::move(result.created_at);
  return c;
}

EmbeddingClient::EmbeddingClient(std::shared_ptr<RequestExecutor> executor)
    : executor_(std::move(executor)) {}

std::vector<double> EmbeddingClient::embed(std::string_view input) {
  if (text::trim(input).empty()) throw DataError("cannot embed empty text");
  json p;
  p["text"] = input;
  auto result = executor_->run(Capability::embedding, p, [](const json& v) {
    const auto it = v.find("vector");
    if (it == v.end() || !it->is_array() || it->empty()) {
      throw ProviderError(ProviderErrorKind::validation, "embedding result has no vector");
    }
    for (const auto& x : *it) {
      if (!x.is_number() || !std::isfinite(x.get<double>())) {
        throw ProviderError(ProviderErrorKind::validation, "embedding has non-finite values");
      }
    }
  });
  return result.value.at("vector").get<std::vector<double>>();
}

NliClient::NliClient(std::shared_ptr<RequestExecutor> executor)
    : executor_(std::move(executor)) {}

namespace {

std::optional<NliLabel> parse_nli_label(std::string_view raw) {
  const std::string value = text::lowercase(raw);
  if (value == "entailment") return NliLabel::entailment;
  if (value == "neutral") return NliLabel::neutral;
  if (value == "contradiction") return NliLabel::contradiction;
  return std::nullopt;
}

NliVerdict to_verdict(const json& v) {
  const auto& labels = v.at("labels");
  const auto& scores = v.at("scores");
  NliVerdict verdict;
  std::array<bool, 3> seen{};
  double total = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto label = parse_nli_label(labels[i].get<std::string>());
    const auto idx = static_cast<std::size_t>(*label);
    seen[idx] = true;
    verdict.scores[idx] = scores[i].get<double>();
    total += verdict.scores[idx];
  }
  for (double& s : verdict.scores) s /= total;
  std::size_t best = 0;
  for (std::size_t i = 1; i < 3; ++i) {
    if (verdict.scores[i] > verdict.scores[best]) best = i;
  }
  verdict.label = static_cast<NliLabel>(best);
  return verdict;
}

}  // namespace

NliVerdict NliClient::nli(std::string_view premise, std::string_view hypothesis) {
  if (text::trim(premise).empty() || text::trim(hypothesis).empty()) {
    throw DataError("NLI premise and hypothesis must be non-empty");
  }
  json p;
  p["premise"] = premise;
  p["hypothesis"] = hypothesis;
  auto result = executor_->run(Capability::nli, p, [](const json& v) {
    const auto labels = v.find("labels");
    const auto scores = v.find("scores");
    if (labels == v.end() || scores == v.end() || !labels->is_array() || !scores->is_array() ||
        labels->size() != 3 || scores->size() != 3) {
      throw ProviderError(ProviderErrorKind::validation,
                          "NLI result must carry three labels and three scores");
    }
    std::array<bool, 3> seen{};
    double total = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      const auto& l = (*labels)[i];
      const auto& s = (*scores)[i];
      const auto label = l.is_string() ? parse_nli_label(l.get<std::string>()) : std::nullopt;
      if (!label || seen[static_cast<std::size_t>(*label)]) {
        throw ProviderError(ProviderErrorKind::validation, "NLI labels are not a permutation");
      }
      seen[static_cast<std::size_t>(*label)] = true;
      if (!s.is_number() || !std::isfinite(s.get<double>()) || s.get<double>() < 0.0) {
        throw ProviderError(ProviderErrorKind::validation, "NLI scores must be non-negative");
      }
      total += s.get<double>();
    }
    if (!(total > 0.0)) {
      throw ProviderError(ProviderErrorKind::validation, "NLI scores sum to zero");
    }
  });
  return to_verdict(result.value);
}

ToxicityClient::ToxicityClient(std::shared_ptr<RequestExecutor> executor)
    : executor_(std::move(executor)) {}

double ToxicityClient::toxicity(std::string_view input) {
  if (text::trim(input).empty()) throw DataError("cannot score empty text");
  json p;
  p["text"] = input;
  auto result = executor_->run(Capability::toxicity, p, [](const json& v) {
    const auto it = v.find("score");
    if (it == v.end() || !it->is_number()) {
      throw ProviderError(ProviderErrorKind::validation, "toxicity result has no score");
    }
    const double score = it->get<double>();
    if (!(score >= 0.0 && score <= 1.0)) {
      throw ProviderError(ProviderErrorKind::validation,
                          "toxicity score outside [0, 1]: " + it->dump());
    }
  });
  return result.value.at("score").get<double>();
}

// --- scheduling ----------------------------------------------------------

void run_bounded(std::size_t count, int parallelism,
                 const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  if (parallelism < 1) throw ConfigError("parallelism must be at least 1");
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(parallelism), count);
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&] {
        while (!stop.load()) {
          const std::size_t i = next.fetch_add(1);
          if (i >= count) return;
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            stop = true;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace reframe
