#include "supplyscan/error.hpp"

namespace supplyscan {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidConfig: return "invalid-config";
    case ErrorCode::DegeneratePlane: return "degenerate-plane";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::MalformedHeader: return "malformed-header";
    case ErrorCode::ValueExceedsBitDepth: return "value-exceeds-bit-depth";
    case ErrorCode::MissingSidecar: return "missing-sidecar";
    case ErrorCode::MalformedCsv: return "malformed-csv";
    case ErrorCode::NonMonotonicFrequency: return "non-monotonic-frequency";
    case ErrorCode::TooFewPoints: return "too-few-points";
    case ErrorCode::ScheduleMismatch: return "schedule-mismatch";
    case ErrorCode::EmptyInput: return "empty-input";
    case ErrorCode::LabelMismatch: return "label-mismatch";
    case ErrorCode::InconsistentDimensions: return "inconsistent-dimensions";
    case ErrorCode::ConfigParse: return "config-parse";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

}  // namespace supplyscan
