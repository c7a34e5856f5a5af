#include "supplyscan/sensor_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "supplyscan/error.hpp"
#include "supplyscan/keyed_rng.hpp"

namespace supplyscan {

namespace {

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::InvalidConfig, "invalid-config: " + what);
}

double wrap_unit(double x) { return x - std::floor(x); }

}  // namespace

std::string_view to_string(BayerPattern pattern) noexcept {
  switch (pattern) {
    case BayerPattern::RGGB: return "RGGB";
    case BayerPattern::BGGR: return "BGGR";
    case BayerPattern::GRBG: return "GRBG";
    case BayerPattern::GBRG: return "GBRG";
  }
  return "RGGB";
}

BayerPattern parse_bayer_pattern(std::string_view text) {
  if (text == "RGGB") return BayerPattern::RGGB;
  if (text == "BGGR") return BayerPattern::BGGR;
  if (text == "GRBG") return BayerPattern::GRBG;
  if (text == "GBRG") return BayerPattern::GBRG;
  invalid("bayer_pattern must be one of RGGB, BGGR, GRBG, GBRG (got '" + std::string(text) + "')");
}

BayerChannel bayer_channel_at(BayerPattern pattern, std::size_t row, std::size_t col) noexcept {
  const bool odd_row = row & 1u;
  const bool odd_col = col & 1u;
  // Green sites sit on the anti-diagonal for RGGB/BGGR, on the diagonal otherwise.
  const bool green_on_diagonal = pattern == BayerPattern::GRBG || pattern == BayerPattern::GBRG;
  if ((odd_row == odd_col) == green_on_diagonal) {
    return odd_row ? BayerChannel::G2 : BayerChannel::G1;
  }
  const bool red_first_row = pattern == BayerPattern::RGGB || pattern == BayerPattern::GRBG;
  return (odd_row != red_first_row) ? BayerChannel::R : BayerChannel::B;
}

std::string_view to_string(FrameRole role) noexcept {
  switch (role) {
    case FrameRole::Unspecified: return "unspecified";
    case FrameRole::Reference: return "reference";
    case FrameRole::Sweep: return "sweep";
  }
  return "unspecified";
}

FrameRole parse_frame_role(std::string_view text) {
  if (text == "unspecified") return FrameRole::Unspecified;
  if (text == "reference") return FrameRole::Reference;
  if (text == "sweep") return FrameRole::Sweep;
  throw Error(ErrorCode::ConfigParse, "unknown frame role '" + std::string(text) + "'");
}

CouplingTransfer::CouplingTransfer(std::vector<CouplingKnot> knots) : knots_(std::move(knots)) {
  if (knots_.empty()) invalid("coupling transfer needs at least one knot");
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    const auto& k = knots_[i];
    if (!std::isfinite(k.frequency_hz) || k.frequency_hz <= 0.0) {
      invalid("coupling knot frequencies must be finite and > 0");
    }
    if (!std::isfinite(k.gain_dn_per_v) || k.gain_dn_per_v < 0.0) {
      invalid("coupling knot gains must be finite and >= 0");
    }
    if (i > 0 && !(knots_[i - 1].frequency_hz < k.frequency_hz)) {
      invalid("coupling knot frequencies must be strictly increasing");
    }
  }
}

double CouplingTransfer::gain(double frequency_hz) const {
  if (frequency_hz <= knots_.front().frequency_hz) return knots_.front().gain_dn_per_v;
  if (frequency_hz >= knots_.back().frequency_hz) return knots_.back().gain_dn_per_v;
  const auto upper = std::upper_bound(
      knots_.begin(), knots_.end(), frequency_hz,
      [](double f, const CouplingKnot& k) { return f < k.frequency_hz; });
  const auto lower = upper - 1;
  if (lower->frequency_hz == frequency_hz) return lower->gain_dn_per_v;
  const double w = std::log(frequency_hz / lower->frequency_hz) /
                   std::log(upper->frequency_hz / lower->frequency_hz);
  const double g0 = lower->gain_dn_per_v;
  const double g1 = upper->gain_dn_per_v;
  // Straight lines on a dB-vs-log-frequency plot; a zero-gain knot has no dB value,
  // so segments touching one interpolate the gain itself.
  if (g0 > 0.0 && g1 > 0.0) return g0 * std::pow(g1 / g0, w);
  return g0 + w * (g1 - g0);
}

void SensorConfig::validate() const {
  if (width < 2 || width % 2 != 0) invalid("width must be even and >= 2");
  if (height < 2 || height % 2 != 0) invalid("height must be even and >= 2");
  if (bit_depth < 8 || bit_depth > 16) invalid("bit_depth must be in [8, 16]");
  if (black_level > max_value()) invalid("black_level must be below 2^bit_depth");
  if (!std::isfinite(frame_rate) || frame_rate <= 0.0) invalid("frame_rate must be finite and > 0");
  const double t_row = row_period();
  if (!std::isfinite(t_row) || t_row <= 0.0) invalid("row period must be finite and > 0");
  for (auto [name, sigma] : {std::pair{"read_noise_sigma", read_noise_sigma},
                             std::pair{"row_fpn_sigma", row_fpn_sigma},
                             std::pair{"col_fpn_sigma", col_fpn_sigma}}) {
    if (!std::isfinite(sigma) || sigma < 0.0) invalid(std::string(name) + " must be finite and >= 0");
  }
  // Knot invariants are enforced on construction; re-check for configs built field-wise.
  CouplingTransfer check(std::vector<CouplingKnot>(coupling.knots().begin(), coupling.knots().end()));
}

void SupplyNoiseSpec::validate() const {
  if (!std::isfinite(frequency_hz) || frequency_hz < 0.0) invalid("frequency must be finite and >= 0");
  if (!std::isfinite(amplitude_v) || amplitude_v < 0.0) invalid("amplitude must be finite and >= 0");
  if (phase_policy.kind == PhasePolicy::Kind::Fixed && !std::isfinite(phase_policy.fixed_phase_rad)) {
    invalid("fixed phase must be finite");
  }
}

double supply_ripple_at(const SupplyNoiseSpec& spec, double phase_rad, double t_seconds) {
  if (spec.is_silent()) return 0.0;
  return spec.amplitude_v * std::sin(2.0 * std::numbers::pi * spec.frequency_hz * t_seconds + phase_rad);
}

Sensor::Sensor(SensorConfig config) : config_(std::move(config)) {
  config_.validate();
  const rng::Key fpn = rng::Key(config_.seed).with("fpn");
  row_fpn_.resize(config_.height, 0.0);
  col_fpn_.resize(config_.width, 0.0);
  if (config_.row_fpn_sigma > 0.0) {
    const rng::Key rows = fpn.with("row");
    for (std::uint32_t r = 0; r < config_.height; ++r) {
      row_fpn_[r] = config_.row_fpn_sigma * rng::normal(rows.with(r));
    }
  }
  if (config_.col_fpn_sigma > 0.0) {
    const rng::Key cols = fpn.with("col");
    for (std::uint32_t c = 0; c < config_.width; ++c) {
      col_fpn_[c] = config_.col_fpn_sigma * rng::normal(cols.with(c));
    }
  }
}

double Sensor::frame_phase(const SupplyNoiseSpec& spec, StreamKey stream,
                           std::uint64_t frame_index) const {
  if (spec.phase_policy.kind == PhasePolicy::Kind::Fixed) return spec.phase_policy.fixed_phase_rad;
  const rng::Key key = rng::Key(stream.value).with("phase").with(frame_index);
  return 2.0 * std::numbers::pi * rng::uniform(key.bits());
}

std::vector<double> Sensor::row_offsets(const SupplyNoiseSpec& spec, double phase_rad,
                                        std::uint64_t frame_index) const {
  std::vector<double> offsets(config_.height, 0.0);
  if (spec.is_silent()) return offsets;

  const double peak = coupling_gain(config_.coupling, spec.frequency_hz) * spec.amplitude_v;
  // Row r of frame k starts at n * t_row with n = k * (H + blank) + r. Reducing the
  // cycle count per row modulo 1 keeps the sine argument small and makes frequencies
  // that differ by a multiple of the row rate evaluate identically.
  const double row_rate = config_.row_rate();
  const double cycles_per_row = std::fmod(spec.frequency_hz, row_rate) / row_rate;
  const std::uint64_t rows_per_frame = std::uint64_t{config_.height} + config_.v_blank_rows;
  const std::uint64_t first_row = frame_index * rows_per_frame;
  for (std::uint32_t r = 0; r < config_.height; ++r) {
    const double n = static_cast<double>(first_row + r);
    const double cycles = wrap_unit(cycles_per_row * n);
    offsets[r] = peak * std::sin(2.0 * std::numbers::pi * cycles + phase_rad);
  }
  return offsets;
}

RawFrame Sensor::capture_dark_frame(const SupplyNoiseSpec& spec, std::uint64_t frame_index) const {
  return capture_dark_frame(spec, frame_index, StreamKey{config_.seed});
}

RawFrame Sensor::capture_dark_frame(const SupplyNoiseSpec& spec, std::uint64_t frame_index,
                                    StreamKey stream) const {
  spec.validate();
  const double phase = frame_phase(spec, stream, frame_index);
  const std::vector<double> offsets = row_offsets(spec, phase, frame_index);

  RawFrame frame;
  frame.width = config_.width;
  frame.height = config_.height;
  frame.bit_depth = config_.bit_depth;
  frame.black_level = config_.black_level;
  frame.bayer_pattern = config_.bayer_pattern;
  frame.frame_index = frame_index;
  frame.metadata.seed = stream.value;
  frame.metadata.frequency_hz = spec.frequency_hz;
  frame.metadata.amplitude_v = spec.amplitude_v;
  frame.metadata.phase_rad = phase;
  frame.pixels.resize(std::size_t{config_.width} * config_.height);

  const double ceiling = static_cast<double>(config_.max_value());
  const double sigma = config_.read_noise_sigma;
  const rng::Key read = rng::Key(stream.value).with("read").with(frame_index);
  auto quantize = [ceiling](double v) {
    return static_cast<std::uint16_t>(std::clamp(std::round(v), 0.0, ceiling));
  };

  for (std::uint32_t r = 0; r < config_.height; ++r) {
    const double row_base = config_.black_level + row_fpn_[r] + offsets[r];
    const rng::Key row_key = read.with(r);
    std::uint16_t* out = frame.pixels.data() + std::size_t{r} * config_.width;
    // Width is even, so read noise is drawn one Box-Muller pair per column pair.
    for (std::uint32_t c = 0; c < config_.width; c += 2) {
      double n0 = 0.0;
      double n1 = 0.0;
      if (sigma > 0.0) {
        const auto pair = rng::normal_pair(row_key.with(c / 2));
        n0 = sigma * pair.first;
        n1 = sigma * pair.second;
      }
      out[c] = quantize(row_base + col_fpn_[c] + n0);
      out[c + 1] = quantize(row_base + col_fpn_[c + 1] + n1);
    }
  }
  return frame;
}

}  // namespace supplyscan
