#include "supplyscan/sweep_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>

#include "supplyscan/config_codec.hpp"
#include "supplyscan/error.hpp"
#include "supplyscan/keyed_rng.hpp"

namespace supplyscan {

namespace {

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::InvalidConfig, "invalid-config: " + what);
}

// Relative slack for deciding that a generated grid point "lands on" f_stop.
constexpr double kEndpointTolerance = 1e-9;

double median(std::vector<double> values) {
  const std::size_t n = values.size();
  std::sort(values.begin(), values.end());
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<Plane> capture_burst(const Sensor& sensor, const SupplyNoiseSpec& spec, StreamKey stream,
                                 std::uint32_t frames, AnalysisPlane plane_kind, FrameRole role,
                                 std::optional<std::uint32_t> step_index, const SweepExecution& execution,
                                 std::mutex& sink_mutex) {
  std::vector<Plane> planes;
  planes.reserve(frames);
  for (std::uint32_t j = 0; j < frames; ++j) {
    RawFrame frame = sensor.capture_dark_frame(spec, j, stream);
    frame.metadata.role = role;
    frame.metadata.step_index = step_index;
    planes.push_back(analysis_plane(frame, plane_kind));
    if (execution.frame_sink) {
      std::lock_guard lock(sink_mutex);
      execution.frame_sink(frame);
    }
  }
  return planes;
}

}  // namespace

std::string_view to_string(ScheduleMode mode) noexcept { return mode == ScheduleMode::Linear ? "linear" : "log"; }

ScheduleMode parse_schedule_mode(std::string_view text) {
  if (text == "linear") return ScheduleMode::Linear;
  if (text == "log") return ScheduleMode::Log;
  invalid("schedule must be 'linear' or 'log' (got '" + std::string(text) + "')");
}

void SweepConfig::validate() const {
  if (!std::isfinite(f_start_hz) || f_start_hz < 0.0) invalid("f_start_hz must be finite and >= 0");
  if (!std::isfinite(f_stop_hz)) invalid("f_stop_hz must be finite");
  if (f_start_hz > f_stop_hz) invalid("f_start_hz must not exceed f_stop_hz");
  if (mode == ScheduleMode::Linear) {
    if (!std::isfinite(f_step_hz) || f_step_hz <= 0.0) invalid("f_step_hz must be > 0");
  } else {
    if (!std::isfinite(points_per_decade) || points_per_decade <= 0.0) invalid("points_per_decade must be > 0");
    if (f_start_hz <= 0.0) invalid("f_start_hz must be > 0 for a log schedule");
  }
  if (!std::isfinite(amplitude_v) || amplitude_v < 0.0) invalid("amplitude_v must be finite and >= 0");
  if (frames_per_step < 1) invalid("frames_per_step must be >= 1");
  if (phase_policy.kind == PhasePolicy::Kind::Fixed && !std::isfinite(phase_policy.fixed_phase_rad)) {
    invalid("phase_rad must be finite");
  }
}

std::vector<double> frequency_schedule(const SweepConfig& config) {
  config.validate();
  std::vector<double> out;
  const double span = config.f_stop_hz - config.f_start_hz;
  if (config.mode == ScheduleMode::Linear) {
    const double steps = span / config.f_step_hz;
    auto n = static_cast<std::size_t>(std::floor(steps));
    const bool lands_on_stop = std::abs(steps - std::round(steps)) <= kEndpointTolerance * std::max(1.0, steps);
    if (lands_on_stop) n = static_cast<std::size_t>(std::round(steps));
    out.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i) out.push_back(config.f_start_hz + static_cast<double>(i) * config.f_step_hz);
    if (lands_on_stop) out.back() = config.f_stop_hz;
    return out;
  }

  const double decades = std::log10(config.f_stop_hz / config.f_start_hz);
  const double steps = decades * config.points_per_decade;
  for (std::size_t i = 0;; ++i) {
    const double position = static_cast<double>(i);
    if (position > steps * (1.0 + kEndpointTolerance) + kEndpointTolerance) break;
    out.push_back(config.f_start_hz * std::pow(10.0, position / config.points_per_decade));
  }
  // The last grid point is replaced by f_stop when it coincides with it, otherwise f_stop is appended.
  if (std::abs(out.back() - config.f_stop_hz) <= kEndpointTolerance * config.f_stop_hz) {
    out.back() = config.f_stop_hz;
  } else {
    out.push_back(config.f_stop_hz);
  }
  out.front() = config.f_start_hz;
  return out;
}

StreamKey reference_stream(std::uint64_t run_seed) noexcept {
  return StreamKey{rng::Key(run_seed).with("reference").bits()};
}

StreamKey step_stream(std::uint64_t run_seed, std::size_t step_index) noexcept {
  return StreamKey{rng::Key(run_seed).with("step").with(step_index).bits()};
}

CharacterisationCurve run_sweep(const Sensor& sensor, const SweepConfig& config, const SweepExecution& execution) {
  const std::vector<double> schedule = frequency_schedule(config);
  std::mutex sink_mutex;

  std::optional<RowReference> reference;
  if (config.reference_frames > 0) {
    const SupplyNoiseSpec silent{0.0, 0.0, config.phase_policy};
    const auto planes = capture_burst(sensor, silent, reference_stream(config.run_seed), config.reference_frames,
                                      config.analysis_plane, FrameRole::Reference, std::nullopt, execution,
                                      sink_mutex);
    reference = capture_reference(planes);
  }

  std::vector<std::size_t> order = execution.step_order;
  if (order.empty()) {
    order.resize(schedule.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
  } else {
    std::vector<std::size_t> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (sorted[i] != i || sorted.size() != schedule.size()) {
        throw Error(ErrorCode::InvalidConfig, "invalid-config: step_order must be a permutation of the schedule");
      }
    }
  }

  std::vector<MetricSummary> summaries(schedule.size());
  auto run_step = [&](std::size_t step) {
    const SupplyNoiseSpec spec{schedule[step], config.amplitude_v, config.phase_policy};
    const auto planes = capture_burst(sensor, spec, step_stream(config.run_seed, step), config.frames_per_step,
                                      config.analysis_plane, FrameRole::Sweep, static_cast<std::uint32_t>(step),
                                      execution, sink_mutex);
    summaries[step] = row_noise_burst(planes, reference);
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(execution.threads, static_cast<unsigned>(order.size())));
  if (threads == 1) {
    for (std::size_t step : order) run_step(step);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
      std::vector<std::jthread> workers;
      for (unsigned t = 0; t < threads; ++t) {
        workers.emplace_back([&] {
          for (std::size_t i = next++; i < order.size(); i = next++) {
            try {
              run_step(order[i]);
            } catch (...) {
              std::lock_guard lock(failure_mutex);
              if (!failure) failure = std::current_exception();
            }
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
  }

  CharacterisationCurve curve;
  curve.run_seed = config.run_seed;
  curve.config_fingerprint = config_fingerprint(sensor.config(), config);
  curve.points.reserve(schedule.size());
  for (std::size_t i = 0; i < schedule.size(); ++i) curve.points.push_back({schedule[i], std::move(summaries[i])});
  return curve;
}

double critical_threshold(const CharacterisationCurve& curve, double k) {
  std::vector<double> metric;
  metric.reserve(curve.points.size());
  for (const auto& p : curve.points) metric.push_back(p.summary.mean_metric);
  const double center = median(metric);
  for (double& v : metric) v = std::abs(v - center);
  return center + k * kMadToSigma * median(std::move(metric));
}

std::vector<CriticalRange> detect_critical_ranges(const CharacterisationCurve& curve, double k) {
  if (curve.points.size() < 3) {
    throw Error(ErrorCode::TooFewPoints, "too-few-points: critical range detection needs at least 3 points, got " +
                                             std::to_string(curve.points.size()));
  }
  const double threshold = critical_threshold(curve, k);

  std::vector<CriticalRange> ranges;
  std::optional<std::size_t> last_hit;
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const auto& p = curve.points[i];
    if (!(p.summary.mean_metric > threshold)) continue;
    // A gap of exactly one sub-threshold point still continues the current range.
    if (!last_hit || i - *last_hit > 2) {
      ranges.push_back({p.frequency_hz, p.frequency_hz, p.frequency_hz, p.summary.mean_metric});
    } else {
      CriticalRange& r = ranges.back();
      r.f_high_hz = p.frequency_hz;
      if (p.summary.mean_metric > r.peak_metric) {
        r.peak_metric = p.summary.mean_metric;
        r.peak_frequency_hz = p.frequency_hz;
      }
    }
    last_hit = i;
  }
  return ranges;
}

RepeatabilityReport compare_runs(const std::vector<CharacterisationCurve>& curves) {
  if (curves.size() < 2) throw Error(ErrorCode::TooFewPoints, "too-few-points: repeatability needs at least 2 runs");
  const auto& first = curves.front().points;
  for (const auto& c : curves) {
    bool same = c.points.size() == first.size();
    for (std::size_t i = 0; same && i < first.size(); ++i) same = c.points[i].frequency_hz == first[i].frequency_hz;
    if (!same) throw Error(ErrorCode::ScheduleMismatch, "schedule-mismatch: runs were swept over different frequencies");
  }

  RepeatabilityReport report;
  report.n_runs = curves.size();
  for (std::size_t i = 0; i < first.size(); ++i) {
    double lo = curves.front().points[i].summary.mean_metric;
    double hi = lo;
    double sum = 0.0;
    for (const auto& c : curves) {
      const double v = c.points[i].summary.mean_metric;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
    }
    const double mean_of_means = sum / static_cast<double>(curves.size());
    const double deviation = (hi - lo) / std::max(mean_of_means, kDeviationFloorDn);
    report.per_frequency_deviation.push_back({first[i].frequency_hz, deviation});
    report.max_relative_deviation = std::max(report.max_relative_deviation, deviation);
  }
  return report;
}

}  // namespace supplyscan
