#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "supplyscan/raw_pipeline.hpp"
#include "supplyscan/row_noise_metric.hpp"
#include "supplyscan/sensor_model.hpp"

namespace supplyscan {

enum class ScheduleMode { Linear, Log };

std::string_view to_string(ScheduleMode mode) noexcept;
ScheduleMode parse_schedule_mode(std::string_view text);

struct SweepConfig {
  double f_start_hz = 0.0;
  double f_stop_hz = 100'000.0;
  ScheduleMode mode = ScheduleMode::Linear;
  double f_step_hz = 1'000.0;        // linear mode
  double points_per_decade = 20.0;   // log mode
  double amplitude_v = 1.0;
  std::uint32_t frames_per_step = 8;
  AnalysisPlane analysis_plane = AnalysisPlane::G1;
  std::uint64_t run_seed = 0;
  std::uint32_t reference_frames = 16;
  PhasePolicy phase_policy = PhasePolicy::per_frame_random();

  /// Throws Error(InvalidConfig); the message names the offending field.
  void validate() const;

  bool operator==(const SweepConfig&) const = default;
};

/// Linear: f_start + i * f_step up to f_stop. Log: f_start * 10^(i / points_per_decade),
/// with f_stop appended. Strictly increasing in both modes.
std::vector<double> frequency_schedule(const SweepConfig& config);

struct CurvePoint {
  double frequency_hz;
  MetricSummary summary;
};

struct CharacterisationCurve {
  std::vector<CurvePoint> points;
  std::string config_fingerprint;
  std::uint64_t run_seed = 0;
};

/// How run_sweep schedules its steps. Results never depend on these settings.
struct SweepExecution {
  std::vector<std::size_t> step_order;  // empty: natural order
  unsigned threads = 1;
  /// Receives every captured frame (reference frames first). Calls are serialized.
  std::function<void(const RawFrame&)> frame_sink;
};

/// Stream feeding the zero-injection reference burst of a run.
StreamKey reference_stream(std::uint64_t run_seed) noexcept;
/// Stream feeding the burst of one schedule step.
StreamKey step_stream(std::uint64_t run_seed, std::size_t step_index) noexcept;

CharacterisationCurve run_sweep(const Sensor& sensor, const SweepConfig& config,
                                const SweepExecution& execution = {});

struct CriticalRange {
  double f_low_hz;
  double f_high_hz;
  double peak_frequency_hz;
  double peak_metric;
};

inline constexpr double kDefaultCriticalK = 6.0;
inline constexpr double kMadToSigma = 1.4826;

/// median(mean_metric) + k * 1.4826 * MAD(mean_metric).
double critical_threshold(const CharacterisationCurve& curve, double k);

/// Maximal runs of points strictly above the threshold, bridging single-point
/// gaps, ordered by frequency.
std::vector<CriticalRange> detect_critical_ranges(const CharacterisationCurve& curve,
                                                  double k = kDefaultCriticalK);

struct FrequencyDeviation {
  double frequency_hz;
  double deviation;
};

struct RepeatabilityReport {
  std::size_t n_runs = 0;
  double max_relative_deviation = 0.0;
  std::vector<FrequencyDeviation> per_frequency_deviation;
};

inline constexpr double kDeviationFloorDn = 1e-9;

/// Per frequency: (max - min) / max(mean of the runs' means, 1e-9).
RepeatabilityReport compare_runs(const std::vector<CharacterisationCurve>& curves);

}  // namespace supplyscan
