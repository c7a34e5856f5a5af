#include "supplyscan/raw_pipeline.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "supplyscan/error.hpp"

namespace supplyscan {

namespace {

struct Offset {
  int dr;
  int dc;
};

constexpr std::array<Offset, 4> kCross{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};
constexpr std::array<Offset, 4> kDiagonal{{{-1, -1}, {-1, 1}, {1, -1}, {1, 1}}};
constexpr std::array<Offset, 2> kHorizontal{{{0, -1}, {0, 1}}};
constexpr std::array<Offset, 2> kVertical{{{-1, 0}, {1, 0}}};

enum class Colour { Red, Green, Blue };

Colour colour_of(BayerChannel ch) {
  switch (ch) {
    case BayerChannel::R: return Colour::Red;
    case BayerChannel::B: return Colour::Blue;
    default: return Colour::Green;
  }
}

void require_even(const RawFrame& frame) {
  if (frame.width % 2 != 0 || frame.height % 2 != 0 || frame.width == 0 || frame.height == 0) {
    throw Error(ErrorCode::DimensionMismatch,
                "dimension-mismatch: Bayer processing needs even, non-zero frame dimensions");
  }
}

}  // namespace

Plane subtract_black_level(const RawFrame& frame, double black_level) {
  Plane out(frame.width, frame.height);
  std::transform(frame.pixels.begin(), frame.pixels.end(), out.values.begin(),
                 [black_level](std::uint16_t v) { return std::max(static_cast<double>(v) - black_level, 0.0); });
  return out;
}

Plane subtract_black_level(const Plane& plane, double black_level) {
  Plane out = plane;
  for (double& v : out.values) v = std::max(v - black_level, 0.0);
  return out;
}

Plane extract_channel_plane(const RawFrame& frame, BayerChannel channel) {
  require_even(frame);
  // Locate the requested site inside the 2x2 tile.
  std::size_t row0 = 0;
  std::size_t col0 = 0;
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 2; ++c) {
      if (bayer_channel_at(frame.bayer_pattern, r, c) == channel) {
        row0 = r;
        col0 = c;
      }
    }
  }
  Plane out(frame.width / 2, frame.height / 2);
  for (std::size_t r = 0; r < out.height; ++r) {
    for (std::size_t c = 0; c < out.width; ++c) {
      out.at(r, c) = frame.at(2 * r + row0, 2 * c + col0);
    }
  }
  return out;
}

RgbImage demosaic_bilinear(const RawFrame& frame) {
  require_even(frame);
  const auto w = static_cast<int>(frame.width);
  const auto h = static_cast<int>(frame.height);
  RgbImage rgb{Plane(w, h), Plane(w, h), Plane(w, h)};

  auto site = [&](int r, int c) { return colour_of(bayer_channel_at(frame.bayer_pattern, r, c)); };
  auto average = [&](int r, int c, Colour want, auto const& stencil) {
    double sum = 0.0;
    int count = 0;
    for (const Offset& o : stencil) {
      const int rr = std::clamp(r + o.dr, 0, h - 1);
      const int cc = std::clamp(c + o.dc, 0, w - 1);
      if (site(rr, cc) == want) {
        sum += frame.at(rr, cc);
        ++count;
      }
    }
    return sum / count;
  };

  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double raw = frame.at(r, c);
      double red = 0.0;
      double green = 0.0;
      double blue = 0.0;
      switch (site(r, c)) {
        case Colour::Red:
          red = raw;
          green = average(r, c, Colour::Green, kCross);
          blue = average(r, c, Colour::Blue, kDiagonal);
          break;
        case Colour::Blue:
          blue = raw;
          green = average(r, c, Colour::Green, kCross);
          red = average(r, c, Colour::Red, kDiagonal);
          break;
        case Colour::Green: {
          green = raw;
          // Red and blue neighbours of a green site lie along its row or its column.
          const bool red_in_row = site(r, c ^ 1) == Colour::Red;
          if (red_in_row) {
            red = average(r, c, Colour::Red, kHorizontal);
            blue = average(r, c, Colour::Blue, kVertical);
          } else {
            red = average(r, c, Colour::Red, kVertical);
            blue = average(r, c, Colour::Blue, kHorizontal);
          }
          break;
        }
      }
      rgb.r.at(r, c) = red;
      rgb.g.at(r, c) = green;
      rgb.b.at(r, c) = blue;
    }
  }
  return rgb;
}

Plane luma(const RgbImage& rgb) {
  Plane out(rgb.g.width, rgb.g.height);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = (rgb.r.values[i] + 2.0 * rgb.g.values[i] + rgb.b.values[i]) / 4.0;
  }
  return out;
}

std::string_view to_string(AnalysisPlane plane) noexcept {
  return plane == AnalysisPlane::G1 ? "G1" : "LUMA";
}

AnalysisPlane parse_analysis_plane(std::string_view text) {
  if (text == "G1") return AnalysisPlane::G1;
  if (text == "LUMA") return AnalysisPlane::Luma;
  throw Error(ErrorCode::InvalidConfig,
              "invalid-config: analysis_plane must be G1 or LUMA (got '" + std::string(text) + "')");
}

Plane analysis_plane(const RawFrame& frame, AnalysisPlane kind) {
  Plane plane = kind == AnalysisPlane::G1 ? extract_channel_plane(frame, BayerChannel::G1)
                                          : luma(demosaic_bilinear(frame));
  // Signed: dark-frame excursions below black level must survive into the metric.
  // Demosaic and luma are linear with unit DC gain, so subtracting afterwards is equivalent.
  const double black = frame.black_level;
  for (double& v : plane.values) v -= black;
  return plane;
}

}  // namespace supplyscan
