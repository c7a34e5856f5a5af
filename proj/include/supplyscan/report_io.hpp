#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

#include "supplyscan/sensor_model.hpp"
#include "supplyscan/sweep_harness.hpp"

namespace supplyscan {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kCurveCsvHeader = "frequency_hz,mean_metric_dn,std_metric_dn,n_frames";
inline constexpr std::string_view kRangesCsvHeader = "f_low_hz,f_high_hz,peak_hz,peak_metric";

/// Shortest text that parses back to exactly the same double.
std::string format_double(double value);

std::string write_curve_csv(const CharacterisationCurve& curve);
/// Loaded points carry an empty per_frame list; only the CSV columns survive.
CharacterisationCurve read_curve_csv(std::string_view text);

struct RunManifest {
  std::string tool_version{kToolVersion};
  std::string timestamp;  // RFC 3339, UTC
  SensorConfig sensor;
  SweepConfig sweep;
  std::uint64_t run_seed = 0;
  std::string config_fingerprint;
};

RunManifest make_manifest(const SensorConfig& sensor, const SweepConfig& sweep,
                          std::chrono::system_clock::time_point when = std::chrono::system_clock::now());
std::string write_manifest(const RunManifest& manifest);
RunManifest read_manifest(std::string_view text);

std::string rfc3339_utc(std::chrono::system_clock::time_point when);

/// One `f_low_hz,f_high_hz,peak_hz,peak_metric` line, no trailing newline.
std::string format_range_line(const CriticalRange& range);
std::string write_ranges_csv(const std::vector<CriticalRange>& ranges);

std::string write_repeatability_report(const RepeatabilityReport& report);

struct PlotOptions {
  bool log_x = false;
  std::string title = "Row noise vs injected supply ripple frequency";
};

/// Self-contained SVG 1.1 line chart, one polyline per curve, critical ranges as
/// shaded bands. Output depends only on the arguments.
std::string render_overlay_svg(const std::vector<CharacterisationCurve>& curves,
                               const std::vector<std::string>& labels,
                               const std::vector<CriticalRange>& ranges = {},
                               const PlotOptions& options = {});

}  // namespace supplyscan
