#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace statmodel {

// Stable error identifiers. The CLI prints these verbatim so scripts can
// match on them; do not rename.
enum class ErrorCode {
  SyntaxError,
  UnsupportedConstruct,
  MalformedAnnotation,
  UnknownAnnotationKey,
  NonAffineBound,
  NonAffineCondition,
  EnumerationTooLarge,
  UnboundParameter,
  NotAnElf,
  MissingDebugInfo,
  UnsupportedDwarfVersion,
  CorruptLineProgram,
  UnparsableLine,
  MalformedArchDescription,
  ModelGap,
  AnnotationMismatch,
  DuplicateFunction,
  UnresolvedCallee,
  UnknownFunction,
  SchemaVersionMismatch,
  MalformedModel,
  ZeroDenominator,
  IoError,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace statmodel
