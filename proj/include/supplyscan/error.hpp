#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace supplyscan {

enum class ErrorCode {
  InvalidConfig,
  DegeneratePlane,
  DimensionMismatch,
  MalformedHeader,
  ValueExceedsBitDepth,
  MissingSidecar,
  MalformedCsv,
  NonMonotonicFrequency,
  TooFewPoints,
  ScheduleMismatch,
  EmptyInput,
  LabelMismatch,
  InconsistentDimensions,
  ConfigParse,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (notably the CLI) can map it onto an exit status.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace supplyscan
