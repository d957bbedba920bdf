#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace geoprog {

/// Root of every error raised by the library. `code()` is a stable
/// machine-readable identifier used in CLI error reports.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

#define GEOPROG_DEFINE_ERROR(Name, Base)                                                   \
  class Name : public Base {                                                               \
   public:                                                                                 \
    explicit Name(const std::string& message) : Base(#Name, message) {}                   \
                                                                                           \
   protected:                                                                              \
    Name(std::string code, const std::string& message) : Base(std::move(code), message) {} \
  };

// Program-text errors carry a source position (1-based).
class DslError : public Error {
 public:
  DslError(std::string code, const std::string& message, std::size_t line = 0, std::size_t column = 0)
      : Error(std::move(code), message), line_(line), column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class SyntaxError : public DslError {
 public:
  SyntaxError(const std::string& message, std::size_t line, std::size_t column,
              std::vector<std::string> expected = {});
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::vector<std::string> expected_;
};

class UnknownPrimitive : public DslError {
 public:
  UnknownPrimitive(const std::string& name, std::size_t line, std::size_t column);
};

class UnboundIdentifier : public DslError {
 public:
  UnboundIdentifier(const std::string& name, std::size_t line, std::size_t column);
};

class DuplicateName : public DslError {
 public:
  DuplicateName(const std::string& name, std::size_t line, std::size_t column);
};

/// Raised by pipelines that require a well-typed program.
class TypeCheckFailed : public Error {
 public:
  explicit TypeCheckFailed(const std::vector<std::string>& errors);
};

/// Per-observation evaluation failure.
class RuntimeError : public Error {
 public:
  using Error::Error;
  explicit RuntimeError(const std::string& message) : Error("RuntimeError", message) {}
};

GEOPROG_DEFINE_ERROR(StepLimitExceeded, RuntimeError)
GEOPROG_DEFINE_ERROR(EvaluationTimeout, RuntimeError)
GEOPROG_DEFINE_ERROR(DomainError, RuntimeError)
GEOPROG_DEFINE_ERROR(ShapeMismatch, RuntimeError)
GEOPROG_DEFINE_ERROR(UnknownConcept, RuntimeError)
GEOPROG_DEFINE_ERROR(UnknownField, RuntimeError)

GEOPROG_DEFINE_ERROR(DataError, Error)
GEOPROG_DEFINE_ERROR(MissingRaster, DataError)
GEOPROG_DEFINE_ERROR(ChecksumMismatch, DataError)
GEOPROG_DEFINE_ERROR(SchemaError, DataError)
GEOPROG_DEFINE_ERROR(TooFewObservations, DataError)
GEOPROG_DEFINE_ERROR(InvalidHiddenProgram, DataError)
GEOPROG_DEFINE_ERROR(RasterFormatError, DataError)

GEOPROG_DEFINE_ERROR(DegenerateFit, Error)
GEOPROG_DEFINE_ERROR(EmptySubset, Error)
GEOPROG_DEFINE_ERROR(UnknownCategory, Error)

GEOPROG_DEFINE_ERROR(LlmError, Error)
GEOPROG_DEFINE_ERROR(ExtractionFailed, LlmError)
GEOPROG_DEFINE_ERROR(UnclassifiablePrompt, LlmError)
GEOPROG_DEFINE_ERROR(BackendError, LlmError)

GEOPROG_DEFINE_ERROR(AllInvalid, Error)
GEOPROG_DEFINE_ERROR(TooFewValid, Error)
GEOPROG_DEFINE_ERROR(ConfigError, Error)

#undef GEOPROG_DEFINE_ERROR

}  // namespace geoprog
