#include "supplyscan/row_noise_metric.hpp"

#include <cmath>
#include <complex>
#include <mutex>
#include <string>

#include <fftw3.h>

#include "supplyscan/error.hpp"

namespace supplyscan {

namespace {

// Neumaier-compensated sum; keeps row means of wide planes exact to the last ulp.
double compensated_sum(std::span<const double> values) {
  double sum = 0.0;
  double carry = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  return sum + carry;
}

double mean(std::span<const double> values) {
  return compensated_sum(values) / static_cast<double>(values.size());
}

void require_rows(const Plane& plane, std::size_t min_rows) {
  if (plane.height < min_rows || plane.width == 0) {
    throw Error(ErrorCode::DegeneratePlane, "degenerate-plane: need at least " + std::to_string(min_rows) +
                                                " rows, got " + std::to_string(plane.height));
  }
}

void require_same_shape(std::span<const Plane> frames) {
  for (const Plane& p : frames) {
    if (p.width != frames.front().width || p.height != frames.front().height) {
      throw Error(ErrorCode::DimensionMismatch, "dimension-mismatch: burst frames differ in size");
    }
  }
}

}  // namespace

double population_std(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double m = mean(values);
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - m) * (values[i] - m);
  return std::sqrt(mean(sq));
}

MetricSummary MetricSummary::from_values(std::vector<double> per_frame) {
  MetricSummary s;
  s.n_frames = per_frame.size();
  if (!per_frame.empty()) {
    s.mean_metric = mean(per_frame);
    s.std_metric = population_std(per_frame);
  }
  s.per_frame = std::move(per_frame);
  return s;
}

std::vector<double> row_means(const Plane& plane) {
  require_rows(plane, 1);
  std::vector<double> out(plane.height);
  for (std::size_t r = 0; r < plane.height; ++r) {
    out[r] = mean(std::span<const double>(plane.values).subspan(r * plane.width, plane.width));
  }
  return out;
}

double row_noise(const Plane& plane, const RowReference* reference) {
  require_rows(plane, 2);
  std::vector<double> m = row_means(plane);
  if (reference) {
    if (reference->reference_row_means.size() != m.size()) {
      throw Error(ErrorCode::DimensionMismatch, "dimension-mismatch: reference has " +
                                                    std::to_string(reference->reference_row_means.size()) +
                                                    " rows, plane has " + std::to_string(m.size()));
    }
    for (std::size_t r = 0; r < m.size(); ++r) m[r] -= reference->reference_row_means[r];
  }
  return population_std(m);
}

RowReference capture_reference(std::span<const Plane> frames) {
  if (frames.empty()) throw Error(ErrorCode::EmptyInput, "empty-input: reference needs at least one frame");
  require_same_shape(frames);
  const std::size_t h = frames.front().height;
  std::vector<std::vector<double>> per_row(h, std::vector<double>(frames.size()));
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const auto m = row_means(frames[f]);
    for (std::size_t r = 0; r < h; ++r) per_row[r][f] = m[r];
  }
  RowReference ref;
  ref.reference_row_means.resize(h);
  for (std::size_t r = 0; r < h; ++r) ref.reference_row_means[r] = mean(per_row[r]);
  return ref;
}

MetricSummary row_noise_burst(std::span<const Plane> frames, const RowReference* reference) {
  if (frames.empty()) throw Error(ErrorCode::EmptyInput, "empty-input: burst needs at least one frame");
  require_same_shape(frames);
  std::vector<double> values;
  values.reserve(frames.size());
  for (const Plane& p : frames) values.push_back(row_noise(p, reference));
  return MetricSummary::from_values(std::move(values));
}

std::vector<SpectrumBin> vertical_banding_spectrum(const Plane& plane) {
  require_rows(plane, 4);
  std::vector<double> m = row_means(plane);
  const double dc = mean(m);
  for (double& v : m) v -= dc;

  const int n = static_cast<int>(m.size());
  const int bins = n / 2 + 1;
  std::vector<std::complex<double>> spectrum(bins);
  // FFTW planning is not thread-safe; execution is.
  static std::mutex planner;
  fftw_plan plan;
  {
    std::lock_guard lock(planner);
    plan = fftw_plan_dft_r2c_1d(n, m.data(), reinterpret_cast<fftw_complex*>(spectrum.data()), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner);
    fftw_destroy_plan(plan);
  }

  std::vector<SpectrumBin> out(bins);
  for (int k = 0; k < bins; ++k) {
    const bool unpaired = k == 0 || (n % 2 == 0 && k == n / 2);
    const double scale = unpaired ? 1.0 / n : 2.0 / n;
    out[k] = {static_cast<double>(k), scale * std::abs(spectrum[k])};
  }
  return out;
}

}  // namespace supplyscan
