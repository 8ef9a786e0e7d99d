#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <semaphore>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "reframe/error.hpp"
#include "reframe/strategies.hpp"

namespace reframe {

enum class Capability { chat, embedding, nli, toxicity };

std::string_view to_string(Capability capability);

struct ProviderConfig {
  std::string endpoint;
  std::string credential_env;  // name of the environment variable
  std::string model;
  double timeout_seconds = 60.0;
  int max_retries = 3;
  int parallelism = 4;
  std::filesystem::path cache_dir;  // empty: in-process cache only
  bool mock = false;

  std::uint64_t mock_seed = 0;
  std::optional<double> mock_toxicity;  // constant score for the mock
  double backoff_base_seconds = 1.0;
  double backoff_max_seconds = 30.0;

  void validate() const;
  static ProviderConfig from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;
};

// Deterministic decoding settings for chat completions.
struct SamplingParams {
  double temperature = 0.0;
  int max_tokens = 120;
  int n = 1;
};

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  double timeout_seconds = 60.0;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Connection-level failure (DNS, refused, timeout). Retried.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

std::shared_ptr<Transport> make_http_transport();

// A backend answers provider-neutral payloads:
//   chat      {messages, temperature, max_tokens, n} -> {text}
//   embedding {text}                                 -> {vector}
//   nli       {premise, hypothesis}                  -> {labels, scores}
//   toxicity  {text}                                 -> {score}
class Backend {
 public:
  virtual ~Backend() = default;
  virtual nlohmann::json call(Capability capability,
                              const nlohmann::json& payload) = 0;
  // Part of the cache key so mock and live results never mix.
  virtual std::string_view name() const = 0;
};

// Thrown by backends for failures worth another attempt.
class RetryableError : public std::runtime_error {
 public:
  RetryableError(std::string what, bool transport)
      : std::runtime_error(std::move(what)), transport_(transport) {}
  bool transport() const { return transport_; }

 private:
  bool transport_;
};

// Wire codecs: OpenAI-compatible chat and embeddings, a plain JSON NLI
// endpoint, and a Perspective-compatible analyze endpoint.
HttpRequest encode_request(Capability capability, const ProviderConfig& config,
                           const std::string& credential,
                           const nlohmann::json& payload);
nlohmann::json decode_response(Capability capability, const HttpResponse& response);

std::shared_ptr<Backend> make_http_backend(const ProviderConfig& config,
                                           std::shared_ptr<Transport> transport);
std::shared_ptr<Backend> make_mock_backend(const ProviderConfig& config);

// Content-addressed response store. One JSON file per entry, written to a
// temporary name and renamed into place.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  struct Entry {
    nlohmann::json value;
    std::string created_at;
  };

  std::optional<Entry> lookup(const std::string& key);
  void store(const std::string& key, const Entry& entry);
  std::filesystem::path entry_path(const std::string& key) const;

 private:
  std::filesystem::path dir_;
  std::mutex mutex_;
  std::unordered_map<std::string, Entry> memory_;
  std::atomic<std::uint64_t> tmp_counter_{0};
};

std::string cache_key(Capability capability, std::string_view model,
                      std::string_view backend, const nlohmann::json& payload);

// The single request path shared by all four clients: cache lookup, bounded
// in-flight concurrency, retry with exponential backoff and jitter, result
// validation, cache store.
class RequestExecutor {
 public:
  using Validator = std::function<void(const nlohmann::json&)>;

  struct Result {
    nlohmann::json value;
    std::string key;
    bool cached = false;
    std::string created_at;  // UTC time the entry was first stored
  };

  RequestExecutor(ProviderConfig config, std::shared_ptr<Backend> backend);

  Result run(Capability capability, const nlohmann::json& payload,
             const Validator& validate = {});

  const ProviderConfig& config() const { return config_; }
  std::size_t backend_calls() const { return backend_calls_.load(); }

 private:
  nlohmann::json call_with_retry(Capability capability,
                                 const nlohmann::json& payload);
  double backoff_delay(int attempt);

  ProviderConfig config_;
  std::shared_ptr<Backend> backend_;
  ResponseCache cache_;
  std::counting_semaphore<> slots_;
  std::atomic<std::size_t> backend_calls_{0};
  std::mutex rng_mutex_;
  std::mt19937_64 rng_;
};

// Builds a mock or HTTP-backed executor from the config. `transport`
// overrides the default HTTP transport (tests).
std::shared_ptr<RequestExecutor> make_executor(
    const ProviderConfig& config, std::shared_ptr<Transport> transport = nullptr);

struct Completion {
  std::string text;
  std::string key;
  bool cached = false;
  std::string created_at;
};

class ChatClient {
 public:
  explicit ChatClient(std::shared_ptr<RequestExecutor> executor,
                      SamplingParams sampling = {});

  Completion complete(const PromptBundle& bundle);
  std::string chat(const PromptBundle& bundle) { return complete(bundle).text; }

  nlohmann::json payload(const PromptBundle& bundle) const;
  const std::string& model() const { return executor_->config().model; }
  RequestExecutor& executor() { return *executor_; }

 private:
  std::shared_ptr<RequestExecutor> executor_;
  SamplingParams sampling_;
};

class EmbeddingClient {
 public:
  explicit EmbeddingClient(std::shared_ptr<RequestExecutor> executor);
  std::vector<double> embed(std::string_view text);
  RequestExecutor& executor() { return *executor_; }

 private:
  std::shared_ptr<RequestExecutor> executor_;
};

enum class NliLabel { entailment, neutral, contradiction };

std::string_view to_string(NliLabel label);

struct NliVerdict {
  NliLabel label = NliLabel::neutral;
  // Indexed by NliLabel; sums to 1.
  std::array<double, 3> scores{};
};

class NliClient {
 public:
  explicit NliClient(std::shared_ptr<RequestExecutor> executor);
  NliVerdict nli(std::string_view premise, std::string_view hypothesis);
  RequestExecutor& executor() { return *executor_; }

 private:
  std::shared_ptr<RequestExecutor> executor_;
};

class ToxicityClient {
 public:
  explicit ToxicityClient(std::shared_ptr<RequestExecutor> executor);
  double toxicity(std::string_view text);
  RequestExecutor& executor() { return *executor_; }

 private:
  std::shared_ptr<RequestExecutor> executor_;
};

// Runs fn(i) for i in [0, count) on at most `parallelism` worker threads.
// Exceptions escaping fn are rethrown after all workers stop.
void run_bounded(std::size_t count, int parallelism,
                 const std::function<void(std::size_t)>& fn);

}  // namespace reframe
