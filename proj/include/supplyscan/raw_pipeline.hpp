#pragma once

#include <cstddef>
#include <vector>

#include "supplyscan/sensor_model.hpp"

namespace supplyscan {

/// Real-valued image plane in DN, row-major.
struct Plane {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;

  Plane() = default;
  Plane(std::size_t w, std::size_t h, double fill = 0.0) : width(w), height(h), values(w * h, fill) {}

  double& at(std::size_t row, std::size_t col) { return values[row * width + col]; }
  double at(std::size_t row, std::size_t col) const { return values[row * width + col]; }

  bool operator==(const Plane&) const = default;
};

struct RgbImage {
  Plane r;
  Plane g;
  Plane b;
};

/// max(pixel - black_level, 0) over the full mosaic.
Plane subtract_black_level(const RawFrame& frame, double black_level);
/// Same floor-at-zero rule applied to an already extracted plane.
Plane subtract_black_level(const Plane& plane, double black_level);

/// Half-resolution plane holding one Bayer site of every 2x2 tile.
Plane extract_channel_plane(const RawFrame& frame, BayerChannel channel);

/// Bilinear demosaic. Missing samples average the nearest same-colour sites of
/// the standard 3x3 stencils; out-of-range neighbours are replaced by clamped
/// coordinates and only contribute when the clamped site has the wanted colour.
RgbImage demosaic_bilinear(const RawFrame& frame);

/// (R + 2G + B) / 4 per pixel.
Plane luma(const RgbImage& rgb);

enum class AnalysisPlane { G1, Luma };

std::string_view to_string(AnalysisPlane plane) noexcept;
AnalysisPlane parse_analysis_plane(std::string_view text);

/// The plane the row-noise metric runs on: the G1 site plane or the luma of the
/// demosaiced frame, with the frame's black level removed. Unlike
/// subtract_black_level() the result is not floored at zero, so sub-black
/// excursions of a dark frame are kept.
Plane analysis_plane(const RawFrame& frame, AnalysisPlane kind);

}  // namespace supplyscan
