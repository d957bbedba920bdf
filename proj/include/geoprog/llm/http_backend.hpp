#pragma once

#include <string>

#include "geoprog/llm/backend.hpp"

namespace geoprog {

struct HttpBackendConfig {
  /// Full endpoint URL, e.g. http://localhost:8000/v1/chat/completions.
  std::string url;
  std::string model;
  std::string api_key;
  double timeout_s = 60.0;
  /// Additional attempts after a failed request.
  int retries = 2;

  /// Overrides fields from DISCIPLE_LLM_URL, DISCIPLE_LLM_MODEL,
  /// DISCIPLE_LLM_KEY and DISCIPLE_LLM_TIMEOUT_S when they are set.
  void apply_environment();
};

/// Chat-completions client: POSTs {model, messages, temperature, max_tokens,
/// seed} and reads choices[0].message.content.
class HttpBackend final : public LlmBackend {
 public:
  /// Throws ConfigError on a malformed URL.
  explicit HttpBackend(HttpBackendConfig config);

  std::string complete(const std::string& prompt, const Sampling& sampling) override;
  std::string name() const override { return "http"; }

 private:
  HttpBackendConfig config_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;
};

}  // namespace geoprog
