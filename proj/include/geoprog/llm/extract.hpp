#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "geoprog/dsl/ast.hpp"
#include "geoprog/llm/backend.hpp"
#include "geoprog/primitives/registry.hpp"

namespace geoprog {

/// Contents of the last ``` fenced block of `response`, or the whole text
/// when there is none. A language tag after the opening fence is dropped.
std::string last_code_block(std::string_view response);

/// All fenced blocks in order of appearance.
std::vector<std::string> code_blocks(std::string_view response);

/// Parses and typechecks the last code block. Throws ExtractionFailed.
FeatureProgram extract_program(std::string_view response, const PrimitiveRegistry& registry);

struct RequestOptions {
  int attempts = 3;
  Sampling sampling;
  std::string kind;
  std::string tag;
};

/// Sends `prompt`, extracting a program from the reply. After a failed
/// extraction the error is appended to the prompt and the backend is asked
/// again, up to `attempts` calls in total. Every call is appended to
/// `exchanges` when given. Throws ExtractionFailed, or BackendError when
/// the backend fails on the last attempt.
FeatureProgram request_program(LlmBackend& backend, const std::string& prompt, const PrimitiveRegistry& registry,
                               const RequestOptions& options, std::vector<Exchange>* exchanges = nullptr);

}  // namespace geoprog
