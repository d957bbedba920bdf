#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace geoprog {

struct Sampling {
  double temperature = 0.8;
  int max_tokens = 1024;
  std::uint64_t seed = 0;
};

/// Text completion service. Implementations must be safe for concurrent calls.
class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  /// Throws BackendError when no response can be obtained.
  virtual std::string complete(const std::string& prompt, const Sampling& sampling) = 0;
  virtual std::string name() const = 0;
};

/// One prompt/response pair as recorded in run transcripts.
struct Exchange {
  std::string kind;  // objective | crossover | mutation | critic
  std::string tag;   // caller-chosen location, e.g. "g3/s17"
  int attempt = 1;
  double temperature = 0.0;
  std::uint64_t seed = 0;
  std::string prompt;
  std::string response;
  std::string error;  // extraction failure, if any
};

}  // namespace geoprog
