#include "geoprog/llm/extract.hpp"

#include "geoprog/dsl/parser.hpp"
#include "geoprog/dsl/typecheck.hpp"
#include "geoprog/error.hpp"
#include "geoprog/util/rng.hpp"

namespace geoprog {

std::vector<std::string> code_blocks(std::string_view response) {
  std::vector<std::string> blocks;
  std::size_t pos = 0;
  while (true) {
    const std::size_t open = response.find("```", pos);
    if (open == std::string_view::npos) break;
    std::size_t body = response.find('\n', open + 3);
    if (body == std::string_view::npos) break;
    ++body;
    const std::size_t close = response.find("```", body);
    if (close == std::string_view::npos) break;
    blocks.emplace_back(response.substr(body, close - body));
    pos = close + 3;
  }
  return blocks;
}

std::string last_code_block(std::string_view response) {
  auto blocks = code_blocks(response);
  if (blocks.empty()) return std::string(response);
  return blocks.back();
}

FeatureProgram extract_program(std::string_view response, const PrimitiveRegistry& registry) {
  const std::string code = last_code_block(response);
  try {
    FeatureProgram program = parse(code, registry);
    require_well_typed(program, registry);
    return program;
  } catch (const SyntaxError& e) {
    throw ExtractionFailed("syntax error at line " + std::to_string(e.line()) + ", column " +
                           std::to_string(e.column()) + ": " + e.what());
  } catch (const TypeCheckFailed& e) {
    throw ExtractionFailed(std::string("type errors: ") + e.what());
  } catch (const Error& e) {
    throw ExtractionFailed(e.code() + ": " + e.what());
  }
}

FeatureProgram request_program(LlmBackend& backend, const std::string& prompt, const PrimitiveRegistry& registry,
                               const RequestOptions& options, std::vector<Exchange>* exchanges) {
  std::string current = prompt;
  std::string last_error = "no attempts made";
  const int attempts = std::max(1, options.attempts);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    Sampling sampling = options.sampling;
    sampling.seed = derive_seed(options.sampling.seed, {static_cast<std::uint64_t>(attempt)});
    Exchange ex{options.kind, options.tag, attempt, sampling.temperature, sampling.seed, current, "", ""};
    try {
      ex.response = backend.complete(current, sampling);
    } catch (const BackendError& e) {
      ex.error = std::string("BackendError: ") + e.what();
      if (exchanges) exchanges->push_back(ex);
      if (attempt == attempts) throw;
      last_error = ex.error;
      continue;
    }
    try {
      FeatureProgram program = extract_program(ex.response, registry);
      if (exchanges) exchanges->push_back(std::move(ex));
      return program;
    } catch (const ExtractionFailed& e) {
      ex.error = e.what();
      last_error = e.what();
      if (exchanges) exchanges->push_back(std::move(ex));
      current = prompt + "\n\nYour previous reply could not be used (" + last_error +
                "). Reply again with one complete program in a fenced code block.\n";
    }
  }
  throw ExtractionFailed("no usable program after " + std::to_string(attempts) + " attempts; last error: " + last_error);
}

}  // namespace geoprog
