#include "geoprog/llm/http_backend.hpp"

#include <httplib.h>

#include <cstdlib>
#include <json.hpp>

#include "geoprog/error.hpp"

namespace geoprog {

using nlohmann::json;

void HttpBackendConfig::apply_environment() {
  if (const char* v = std::getenv("DISCIPLE_LLM_URL")) url = v;
  if (const char* v = std::getenv("DISCIPLE_LLM_MODEL")) model = v;
  if (const char* v = std::getenv("DISCIPLE_LLM_KEY")) api_key = v;
  if (const char* v = std::getenv("DISCIPLE_LLM_TIMEOUT_S")) {
    char* end = nullptr;
    const double t = std::strtod(v, &end);
    if (end == v || !(t > 0.0)) throw ConfigError("DISCIPLE_LLM_TIMEOUT_S must be a positive number");
    timeout_s = t;
  }
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  const std::string& url = config_.url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("LLM URL must start with http:// or https://: '" + url + "'");
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw ConfigError("unsupported LLM URL scheme '" + scheme + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  origin_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (origin_.size() <= scheme_end + 3) throw ConfigError("LLM URL has no host: '" + url + "'");
}

std::string HttpBackend::complete(const std::string& prompt, const Sampling& sampling) {
  const json body{{"model", config_.model},
                  {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
                  {"temperature", sampling.temperature},
                  {"max_tokens", sampling.max_tokens},
                  {"seed", sampling.seed}};
  const std::string payload = body.dump();
  std::string last_error;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    httplib::Client client(origin_);
    const auto timeout = std::chrono::duration<double>(config_.timeout_s);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
    auto res = client.Post(path_, headers, payload, "application/json");
    if (!res) {
      last_error = "request failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP status " + std::to_string(res->status);
      continue;
    }
    try {
      const json reply = json::parse(res->body);
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      last_error = std::string("malformed response: ") + e.what();
    }
  }
  throw BackendError(last_error);
}

}  // namespace geoprog
