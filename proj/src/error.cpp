#include "reframe/error.hpp"

namespace reframe {

std::string_view to_string(ProviderErrorKind kind) {
  switch (kind) {
    case ProviderErrorKind::network: return "network";
    case ProviderErrorKind::retry_exhausted: return "retry_exhausted";
    case ProviderErrorKind::auth: return "auth";
    case ProviderErrorKind::refusal: return "refusal";
    case ProviderErrorKind::parse: return "parse";
    case ProviderErrorKind::validation: return "validation";
    case ProviderErrorKind::http: return "http";
  }
  return "unknown";
}

}  // namespace reframe
