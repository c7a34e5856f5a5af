#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace supplyscan {

enum class BayerPattern { RGGB, BGGR, GRBG, GBRG };

/// Colour sites of a 2x2 Bayer tile. G1 is the green sample in the first row
/// of the tile, G2 the one in the second row.
enum class BayerChannel { R, G1, G2, B };

std::string_view to_string(BayerPattern pattern) noexcept;
BayerPattern parse_bayer_pattern(std::string_view text);

/// Channel sampled at (row, col) for the given mosaic.
BayerChannel bayer_channel_at(BayerPattern pattern, std::size_t row, std::size_t col) noexcept;

struct CouplingKnot {
  double frequency_hz;
  double gain_dn_per_v;

  bool operator==(const CouplingKnot&) const = default;
};

/// Supply-ripple to row-offset transfer. Between knots log(gain) is linear in
/// log(frequency) (linear gain when a knot is zero); outside the knots the gain
/// clamps to the nearest end knot.
class CouplingTransfer {
public:
  CouplingTransfer() : knots_{{1.0, 1.0}} {}
  explicit CouplingTransfer(std::vector<CouplingKnot> knots);

  static CouplingTransfer flat(double gain_dn_per_v) {
    return CouplingTransfer({{1.0, gain_dn_per_v}});
  }

  double gain(double frequency_hz) const;
  std::span<const CouplingKnot> knots() const noexcept { return knots_; }

  bool operator==(const CouplingTransfer&) const = default;

private:
  std::vector<CouplingKnot> knots_;
};

inline double coupling_gain(const CouplingTransfer& transfer, double frequency_hz) {
  return transfer.gain(frequency_hz);
}

struct SensorConfig {
  std::uint32_t width = 1280;
  std::uint32_t height = 800;
  std::uint32_t bit_depth = 10;
  std::uint32_t black_level = 64;
  BayerPattern bayer_pattern = BayerPattern::RGGB;
  double frame_rate = 30.0;
  std::uint32_t v_blank_rows = 20;
  double read_noise_sigma = 2.0;
  double row_fpn_sigma = 0.5;
  double col_fpn_sigma = 0.5;
  CouplingTransfer coupling;
  std::uint64_t seed = 0;

  /// Throws Error(InvalidConfig) naming the offending field.
  void validate() const;

  std::uint32_t max_value() const noexcept { return (1u << bit_depth) - 1u; }
  /// Rows read per second, blanking included.
  double row_rate() const noexcept { return frame_rate * (height + v_blank_rows); }
  double row_period() const noexcept { return 1.0 / row_rate(); }
  double frame_period() const noexcept { return (height + v_blank_rows) * row_period(); }

  bool operator==(const SensorConfig&) const = default;
};

struct PhasePolicy {
  enum class Kind { Fixed, PerFrameRandom };
  Kind kind = Kind::PerFrameRandom;
  double fixed_phase_rad = 0.0;

  static PhasePolicy fixed(double phase_rad) { return {Kind::Fixed, phase_rad}; }
  static PhasePolicy per_frame_random() { return {Kind::PerFrameRandom, 0.0}; }

  bool operator==(const PhasePolicy&) const = default;
};

struct SupplyNoiseSpec {
  double frequency_hz = 0.0;
  double amplitude_v = 0.0;
  PhasePolicy phase_policy;

  void validate() const;
  bool is_silent() const noexcept { return frequency_hz == 0.0 || amplitude_v == 0.0; }
};

/// amplitude * sin(2 pi f t + phase); identically zero for a silent spec.
double supply_ripple_at(const SupplyNoiseSpec& spec, double phase_rad, double t_seconds);

enum class FrameRole { Unspecified, Reference, Sweep };

std::string_view to_string(FrameRole role) noexcept;
FrameRole parse_frame_role(std::string_view text);

struct FrameMetadata {
  std::optional<std::uint64_t> seed;
  std::optional<double> frequency_hz;
  std::optional<double> amplitude_v;
  std::optional<double> phase_rad;
  FrameRole role = FrameRole::Unspecified;
  std::optional<std::uint32_t> step_index;

  bool operator==(const FrameMetadata&) const = default;
};

struct RawFrame {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t bit_depth = 10;
  std::uint32_t black_level = 0;
  BayerPattern bayer_pattern = BayerPattern::RGGB;
  std::vector<std::uint16_t> pixels;  // row-major, DN
  std::uint64_t frame_index = 0;
  FrameMetadata metadata;

  std::uint16_t at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
  bool operator==(const RawFrame&) const = default;
};

/// Selects which keyed stream feeds read noise and per-frame phase. Captures
/// that share a stream and frame index see the same draws.
struct StreamKey {
  std::uint64_t value;
};

/// Immutable simulated sensor. Static row/column FPN tables are drawn once at
/// construction from the ("fpn") stream of config.seed.
class Sensor {
public:
  explicit Sensor(SensorConfig config);

  const SensorConfig& config() const noexcept { return config_; }
  std::span<const double> row_fpn() const noexcept { return row_fpn_; }
  std::span<const double> col_fpn() const noexcept { return col_fpn_; }

  /// Phase used for a frame: fixed, or drawn from (stream, "phase", frame_index).
  double frame_phase(const SupplyNoiseSpec& spec, StreamKey stream, std::uint64_t frame_index) const;

  /// Real-valued per-row disturbance for one frame, in DN.
  std::vector<double> row_offsets(const SupplyNoiseSpec& spec, double phase_rad,
                                  std::uint64_t frame_index) const;

  RawFrame capture_dark_frame(const SupplyNoiseSpec& spec, std::uint64_t frame_index) const;
  RawFrame capture_dark_frame(const SupplyNoiseSpec& spec, std::uint64_t frame_index,
                              StreamKey stream) const;

private:
  SensorConfig config_;
  std::vector<double> row_fpn_;
  std::vector<double> col_fpn_;
};

inline Sensor new_sensor(SensorConfig config) { return Sensor(std::move(config)); }

inline std::vector<double> row_offsets(const Sensor& sensor, const SupplyNoiseSpec& spec,
                                       double phase_rad, std::uint64_t frame_index) {
  return sensor.row_offsets(spec, phase_rad, frame_index);
}

inline RawFrame capture_dark_frame(const Sensor& sensor, const SupplyNoiseSpec& spec,
                                   std::uint64_t frame_index) {
  return sensor.capture_dark_frame(spec, frame_index);
}

}  // namespace supplyscan
