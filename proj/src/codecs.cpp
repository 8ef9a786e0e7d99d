#include <cstdlib>

#include "reframe/gateway.hpp"

namespace reframe {

namespace {

using nlohmann::json;

std::string excerpt(std::string_view body) {
  constexpr std::size_t kMax = 200;
  if (body.size() <= kMax) return std::string(body);
  return std::string(body.substr(0, kMax)) + "...";
}

std::string join_url(std::string base, std::string_view suffix) {
  while (!base.empty() && base.back() == '/') base.pop_back();
  return base + std::string(suffix);
}

[[noreturn]] void parse_failure(Capability capability, std::string_view why,
                                std::string_view body) {
  throw ProviderError(ProviderErrorKind::parse, std::string(to_string(capability)) +
                                                    " response " + std::string(why) +
                                                    "; body: " + excerpt(body));
}

class HttpBackend final : public Backend {
 public:
  HttpBackend(ProviderConfig config, std::shared_ptr<Transport> transport)
      : config_(std::move(config)), transport_(std::move(transport)) {}

  json call(Capability capability, const json& payload) override {
    std::string credential;
    if (!config_.credential_env.empty()) {
      const char* value = std::getenv(config_.credential_env.c_str());
      if (value == nullptr || *value == '\0') {
        throw ConfigError("environment variable " + config_.credential_env + " is not set");
      }
      credential = value;
    }
    const HttpRequest request = encode_request(capability, config_, credential, payload);
    HttpResponse response;
    try {
      response = transport_->post(request);
    } catch (const TransportError& e) {
      throw RetryableError(e.what(), true);
    }
    if (response.status == 429 || response.status >= 500) {
      throw RetryableError("HTTP " + std::to_string(response.status) + ": " +
                               excerpt(response.body),
                           false);
    }
    if (response.status == 401 || response.status == 403) {
      throw ProviderError(ProviderErrorKind::auth,
                          "authentication failed (HTTP " + std::to_string(response.status) +
                              "): " + excerpt(response.body));
    }
    if (response.status < 200 || response.status >= 300) {
      throw ProviderError(ProviderErrorKind::http, "HTTP " + std::to_string(response.status) +
                                                       ": " + excerpt(response.body));
    }
    return decode_response(capability, response);
  }

  std::string_view name() const override { return "http"; }

 private:
  ProviderConfig config_;
  std::shared_ptr<Transport> transport_;
};

}  // namespace

HttpRequest encode_request(Capability capability, const ProviderConfig& config,
                           const std::string& credential, const json& payload) {
  HttpRequest request;
  request.timeout_seconds = config.timeout_seconds;
  request.headers.emplace_back("Content-Type", "application/json");
  json body;
  switch (capability) {
    case Capability::chat:
      request.url = join_url(config.endpoint, "/chat/completions");
      body["model"] = config.model;
      body["messages"] = payload.at("messages");
      body["temperature"] = payload.at("temperature");
      body["max_tokens"] = payload.at("max_tokens");
      body["n"] = payload.at("n");
      break;
    case Capability::embedding:
      request.url = join_url(config.endpoint, "/embeddings");
      body["model"] = config.model;
      body["input"] = payload.at("text");
      break;
    case Capability::nli:
      request.url = config.endpoint;
      body["premise"] = payload.at("premise");
      body["hypothesis"] = payload.at("hypothesis");
      if (!config.model.empty()) body["model"] = config.model;
      break;
    case Capability::toxicity:
      request.url = config.endpoint;
      if (!credential.empty()) {
        request.url += (request.url.find('?') == std::string::npos ? "?key=" : "&key=");
        request.url += credential;
      }
      body["comment"] = {{"text", payload.at("text")}};
      body["languages"] = json::array({"en"});
      body["requestedAttributes"] = {{"TOXICITY", json::object()}};
      body["doNotStore"] = true;
      break;
  }
  if (!credential.empty() && capability != Capability::toxicity) {
    request.headers.emplace_back("Authorization", "Bearer " + credential);
  }
  request.body = body.dump();
  return request;
}

json decode_response(Capability capability, const HttpResponse& response) {
  json body;
  try {
    body = json::parse(response.body);
  } catch (const json::parse_error&) {
    parse_failure(capability, "is not JSON", response.body);
  }
  try {
    switch (capability) {
      case Capability::chat: {
        const auto& choices = body.at("choices");
        if (!choices.is_array() || choices.empty()) {
          parse_failure(capability, "has no choices", response.body);
        }
        const auto& message = choices.at(0).at("message");
        const auto content = message.find("content");
        if (content == message.end() || content->is_null() ||
            (content->is_string() && content->get_ref<const std::string&>().empty())) {
          throw ProviderError(ProviderErrorKind::refusal,
                              "provider returned an empty completion; body: " +
                                  excerpt(response.body));
        }
        return json{{"text", content->get<std::string>()}};
      }
      case Capability::embedding:
        return json{{"vector", body.at("data").at(0).at("embedding")}};
      case Capability::nli:
        return json{{"labels", body.at("labels")}, {"scores", body.at("scores")}};
      case Capability::toxicity:
        return json{{"score", body.at("attributeScores").at("TOXICITY").at("summaryScore").at(
                                  "value")}};
    }
  } catch (const json::exception& e) {
    parse_failure(capability, std::string("is missing fields (") + e.what() + ")",
                  response.body);
  }
  parse_failure(capability, "has an unknown capability", response.body);
}

std::shared_ptr<Backend> make_http_backend(const ProviderConfig& config,
                                           std::shared_ptr<Transport> transport) {
  return std::make_shared<HttpBackend>(config, std::move(transport));
}

}  // namespace reframe
