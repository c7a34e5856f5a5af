#pragma once

// Row-correlated noise metric: population standard deviation of the
// (optionally reference-corrected) row means of a plane. Bursts are measured
// frame by frame and the per-frame values averaged.

#include <optional>
#include <span>
#include <vector>

#include "supplyscan/raw_pipeline.hpp"

namespace supplyscan {

struct MetricSummary {
  double mean_metric = 0.0;
  double std_metric = 0.0;  // population std of per_frame
  std::size_t n_frames = 0;
  std::vector<double> per_frame;

  static MetricSummary from_values(std::vector<double> per_frame);
};

/// Static row pattern (mostly row FPN) subtracted before measuring.
struct RowReference {
  std::vector<double> reference_row_means;
};

std::vector<double> row_means(const Plane& plane);

double row_noise(const Plane& plane, const RowReference* reference = nullptr);
inline double row_noise(const Plane& plane, const std::optional<RowReference>& reference) {
  return row_noise(plane, reference ? &*reference : nullptr);
}

RowReference capture_reference(std::span<const Plane> frames);

MetricSummary row_noise_burst(std::span<const Plane> frames, const RowReference* reference = nullptr);
inline MetricSummary row_noise_burst(std::span<const Plane> frames, const std::optional<RowReference>& reference) {
  return row_noise_burst(frames, reference ? &*reference : nullptr);
}

struct SpectrumBin {
  double cycles_per_frame;
  double magnitude;
};

/// Single-sided amplitude spectrum of the mean-subtracted row-means sequence,
/// bins k = 0 .. H/2. A row pattern a*cos(2 pi k r / H) reports magnitude a at bin k.
std::vector<SpectrumBin> vertical_banding_spectrum(const Plane& plane);

/// Population std with a two-pass mean; shared by the metric and its summaries.
double population_std(std::span<const double> values);

}  // namespace supplyscan
