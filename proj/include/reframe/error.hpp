#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace reframe {

// Base for all errors raised by the library. The CLI maps subclasses to
// exit codes: ConfigError -> 2, ProviderError -> 3, DataError -> 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed, missing or inconsistent input data. `line` is 1-based when the
// error was raised while reading a line-oriented file, 0 otherwise.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what, std::size_t line = 0)
      : Error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

enum class ProviderErrorKind {
  network,          // transport failure persisted through all retries
  retry_exhausted,  // 429/5xx persisted through all retries
  auth,             // 401/403
  refusal,          // provider returned an empty completion
  parse,            // response body did not match the wire format
  validation,       // well-formed response with out-of-contract values
  http,             // other non-retryable HTTP status
};

std::string_view to_string(ProviderErrorKind kind);

class ProviderError : public Error {
 public:
  ProviderError(ProviderErrorKind kind, const std::string& what)
      : Error(what), kind_(kind) {}
  ProviderErrorKind kind() const { return kind_; }

 private:
  ProviderErrorKind kind_;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitProvider = 3;
inline constexpr int kExitData = 4;

}  // namespace reframe
