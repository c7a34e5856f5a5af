#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "supplyscan/error.hpp"
#include "supplyscan/sensor_model.hpp"

namespace supplyscan {
namespace {

constexpr double kPi = std::numbers::pi;

SensorConfig quiet_config() {
  SensorConfig c;
  c.width = 16;
  c.height = 32;
  c.bit_depth = 10;
  c.black_level = 64;
  c.read_noise_sigma = 0.0;
  c.row_fpn_sigma = 0.0;
  c.col_fpn_sigma = 0.0;
  c.coupling = CouplingTransfer::flat(1.0);
  c.seed = 99;
  return c;
}

void expect_invalid(const SensorConfig& c) {
  try {
    Sensor s(c);
    FAIL() << "expected invalid-config";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
  }
}

TEST(BayerLayout, PatternDefinitions) {
  EXPECT_EQ(bayer_channel_at(BayerPattern::RGGB, 0, 0), BayerChannel::R);
  EXPECT_EQ(bayer_channel_at(BayerPattern::RGGB, 0, 1), BayerChannel::G1);
  EXPECT_EQ(bayer_channel_at(BayerPattern::RGGB, 1, 0), BayerChannel::G2);
  EXPECT_EQ(bayer_channel_at(BayerPattern::RGGB, 1, 1), BayerChannel::B);
  EXPECT_EQ(bayer_channel_at(BayerPattern::BGGR, 0, 0), BayerChannel::B);
  EXPECT_EQ(bayer_channel_at(BayerPattern::BGGR, 1, 1), BayerChannel::R);
  EXPECT_EQ(bayer_channel_at(BayerPattern::GRBG, 0, 0), BayerChannel::G1);
  EXPECT_EQ(bayer_channel_at(BayerPattern::GRBG, 0, 1), BayerChannel::R);
  EXPECT_EQ(bayer_channel_at(BayerPattern::GRBG, 1, 0), BayerChannel::B);
  EXPECT_EQ(bayer_channel_at(BayerPattern::GRBG, 1, 1), BayerChannel::G2);
  EXPECT_EQ(bayer_channel_at(BayerPattern::GBRG, 0, 1), BayerChannel::B);
  EXPECT_EQ(bayer_channel_at(BayerPattern::GBRG, 1, 0), BayerChannel::R);
  // Tiling repeats every two rows and columns.
  EXPECT_EQ(bayer_channel_at(BayerPattern::GBRG, 7, 6), bayer_channel_at(BayerPattern::GBRG, 1, 0));
}

TEST(SensorConfig, ZeroSigmaGivesZeroFpn) {
  const Sensor s(quiet_config());
  EXPECT_TRUE(std::all_of(s.row_fpn().begin(), s.row_fpn().end(), [](double v) { return v == 0.0; }));
  EXPECT_TRUE(std::all_of(s.col_fpn().begin(), s.col_fpn().end(), [](double v) { return v == 0.0; }));
}

TEST(SensorConfig, SameConfigSameFpnTables) {
  SensorConfig c = quiet_config();
  c.row_fpn_sigma = 1.5;
  c.col_fpn_sigma = 0.7;
  const Sensor a(c);
  const Sensor b(c);
  ASSERT_EQ(a.row_fpn().size(), c.height);
  EXPECT_TRUE(std::equal(a.row_fpn().begin(), a.row_fpn().end(), b.row_fpn().begin()));
  EXPECT_TRUE(std::equal(a.col_fpn().begin(), a.col_fpn().end(), b.col_fpn().begin()));
  EXPECT_NE(a.row_fpn()[0], a.row_fpn()[1]);

  c.seed += 1;
  const Sensor other(c);
  EXPECT_FALSE(std::equal(a.row_fpn().begin(), a.row_fpn().end(), other.row_fpn().begin()));
}

TEST(SensorConfig, RejectsInvalidConfigs) {
  SensorConfig c = quiet_config();
  c.height = 3;
  expect_invalid(c);
  c = quiet_config();
  c.width = 0;
  expect_invalid(c);
  c = quiet_config();
  c.bit_depth = 7;
  expect_invalid(c);
  c = quiet_config();
  c.bit_depth = 17;
  expect_invalid(c);
  c = quiet_config();
  c.black_level = 1024;
  expect_invalid(c);
  c = quiet_config();
  c.frame_rate = 0.0;
  expect_invalid(c);
  c = quiet_config();
  c.read_noise_sigma = -1.0;
  expect_invalid(c);
}

TEST(CouplingTransfer, RejectsBadKnots) {
  EXPECT_THROW(CouplingTransfer(std::vector<CouplingKnot>{}), Error);
  EXPECT_THROW(CouplingTransfer({{1000.0, 1.0}, {1000.0, 2.0}}), Error);
  EXPECT_THROW(CouplingTransfer({{2000.0, 1.0}, {1000.0, 2.0}}), Error);
  EXPECT_THROW(CouplingTransfer({{1000.0, -1.0}}), Error);
  EXPECT_THROW(CouplingTransfer({{1000.0, std::nan("")}}), Error);
}

TEST(CouplingTransfer, SingleKnotIsExact) {
  const CouplingTransfer t({{1000.0, 1.0}});
  EXPECT_EQ(coupling_gain(t, 1000.0), 1.0);
  EXPECT_EQ(coupling_gain(t, 0.0), 1.0);
  EXPECT_EQ(coupling_gain(t, 1e6), 1.0);
}

TEST(CouplingTransfer, LogMidpointIsGeometricMean) {
  const CouplingTransfer t({{1000.0, 1.0}, {10000.0, 10.0}});
  // Hand value: 10^(1/2).
  EXPECT_NEAR(coupling_gain(t, 1000.0 * std::sqrt(10.0)), 3.1622776601683795, 1e-12);
  EXPECT_EQ(coupling_gain(t, 100.0), 1.0);
  EXPECT_EQ(coupling_gain(t, 0.0), 1.0);
  EXPECT_EQ(coupling_gain(t, 1e5), 10.0);
  EXPECT_EQ(coupling_gain(t, 1000.0), 1.0);
  EXPECT_EQ(coupling_gain(t, 10000.0), 10.0);
}

TEST(CouplingTransfer, ExactAtEveryKnot) {
  const CouplingTransfer t({{50.0, 0.3}, {700.0, 0.0}, {1234.5, 7.25}, {9e4, 1.0 / 3.0}});
  for (const auto& k : t.knots()) EXPECT_EQ(t.gain(k.frequency_hz), k.gain_dn_per_v);
  // Segment touching a zero-gain knot interpolates the gain linearly in log f.
  const double mid = std::sqrt(700.0 * 1234.5);
  EXPECT_NEAR(t.gain(mid), 7.25 / 2.0, 1e-12);
}

TEST(SupplyRipple, ClosedFormValues) {
  const SupplyNoiseSpec one_khz{1000.0, 1.0, PhasePolicy::fixed(0.0)};
  EXPECT_EQ(supply_ripple_at(one_khz, 0.0, 0.0), 0.0);
  EXPECT_NEAR(supply_ripple_at(one_khz, 0.0, 0.25e-3), 1.0, 1e-12);

  const SupplyNoiseSpec mains{50.0, 0.5, PhasePolicy::fixed(kPi / 6)};
  // Oracle: 100 pi is a whole number of turns, so the value is 0.5 sin(pi/6) evaluated in long double.
  const long double expected = 0.5L * std::sin(3.14159265358979323846264338327950288L / 6.0L);
  EXPECT_NEAR(supply_ripple_at(mains, kPi / 6, 1.0), static_cast<double>(expected), 1e-12);
  EXPECT_NEAR(static_cast<double>(expected), 0.25, 1e-15);
}

TEST(SupplyRipple, SilentSpecIsIdenticallyZero) {
  const SupplyNoiseSpec dc{0.0, 3.0, PhasePolicy::fixed(1.0)};
  const SupplyNoiseSpec off{1000.0, 0.0, PhasePolicy::fixed(1.0)};
  for (double t : {0.0, 1e-4, 0.37, 12.0}) {
    EXPECT_EQ(supply_ripple_at(dc, 1.0, t), 0.0);
    EXPECT_EQ(supply_ripple_at(off, 1.0, t), 0.0);
  }
}

TEST(RowOffsets, ZeroAmplitudeIsZero) {
  const Sensor s(quiet_config());
  const auto offsets = row_offsets(s, {1234.0, 0.0, PhasePolicy::fixed(0.3)}, 0.3, 5);
  EXPECT_TRUE(std::all_of(offsets.begin(), offsets.end(), [](double v) { return v == 0.0; }));
}

TEST(RowOffsets, QuarterRowRateCycles) {
  const Sensor s(quiet_config());
  const double amplitude = 3.0;
  const double f = s.config().row_rate() / 4.0;
  const auto offsets = row_offsets(s, {f, amplitude, PhasePolicy::fixed(0.0)}, 0.0, 0);
  // Brute-force oracle: A sin(pi r / 2).
  for (std::size_t r = 0; r < offsets.size(); ++r) {
    EXPECT_NEAR(offsets[r], amplitude * std::sin(kPi * static_cast<double>(r) / 2.0), 1e-12) << "row " << r;
  }
  EXPECT_NEAR(offsets[1], amplitude, 1e-12);
  EXPECT_NEAR(offsets[3], -amplitude, 1e-12);
}

TEST(RowOffsets, MatchClosedFormAtRowStartTimes) {
  SensorConfig c = quiet_config();
  c.coupling = CouplingTransfer({{100.0, 0.5}, {1e5, 4.0}});
  const Sensor s(c);
  const SupplyNoiseSpec spec{7321.25, 1.7, PhasePolicy::fixed(0.4)};
  const std::uint64_t k = 3;
  const auto offsets = row_offsets(s, spec, 0.4, k);
  const double g = coupling_gain(c.coupling, spec.frequency_hz);
  for (std::size_t r = 0; r < offsets.size(); ++r) {
    const double t = static_cast<double>(k) * c.frame_period() + static_cast<double>(r) * c.row_period();
    EXPECT_NEAR(offsets[r], g * supply_ripple_at(spec, 0.4, t), 1e-9) << "row " << r;
  }
}

TEST(RowOffsets, FrequenciesOneRowRateApartAlias) {
  const Sensor s(quiet_config());
  const double row_rate = s.config().row_rate();
  for (double f : {100.0, 1234.5, 5000.25, 77777.0}) {
    const auto a = row_offsets(s, {f, 2.0, PhasePolicy::fixed(0.1)}, 0.1, 2);
    const auto b = row_offsets(s, {f + row_rate, 2.0, PhasePolicy::fixed(0.1)}, 0.1, 2);
    EXPECT_EQ(a, b) << "f = " << f;
    // Direct evaluation of the closed form agrees up to rounding.
    for (std::size_t r = 0; r < a.size(); ++r) {
      const double t = 2 * s.config().frame_period() + static_cast<double>(r) * s.config().row_period();
      EXPECT_NEAR(b[r], supply_ripple_at({f + row_rate, 2.0, PhasePolicy::fixed(0.1)}, 0.1, t), 1e-8);
    }
  }
}

TEST(RowOffsets, LinearInAmplitude) {
  SensorConfig c = quiet_config();
  c.coupling = CouplingTransfer({{10.0, 0.2}, {2e4, 5.0}});
  const Sensor s(c);
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> freq(1.0, 5e4);
  std::uniform_real_distribution<double> amp(0.0, 100.0);
  for (int trial = 0; trial < 50; ++trial) {
    const SupplyNoiseSpec one{freq(gen), amp(gen), PhasePolicy::fixed(0.0)};
    SupplyNoiseSpec twice = one;
    twice.amplitude_v *= 2.0;
    const auto a = row_offsets(s, one, 0.7, static_cast<std::uint64_t>(trial));
    const auto b = row_offsets(s, twice, 0.7, static_cast<std::uint64_t>(trial));
    for (std::size_t r = 0; r < a.size(); ++r) ASSERT_EQ(b[r], 2.0 * a[r]);
  }
}

TEST(CaptureDarkFrame, AllDisturbancesOffGivesBlackLevel) {
  const Sensor s(quiet_config());
  const RawFrame f = capture_dark_frame(s, {1000.0, 0.0, PhasePolicy::per_frame_random()}, 0);
  ASSERT_EQ(f.pixels.size(), 16u * 32u);
  EXPECT_TRUE(std::all_of(f.pixels.begin(), f.pixels.end(), [](std::uint16_t v) { return v == 64; }));
  EXPECT_EQ(f.black_level, 64u);
  EXPECT_EQ(f.bit_depth, 10u);
}

TEST(CaptureDarkFrame, RowsFollowQuantizedRipple) {
  SensorConfig c = quiet_config();
  c.black_level = 512;
  const Sensor s(c);
  const SupplyNoiseSpec spec{c.row_rate() / 4.0, 8.0, PhasePolicy::fixed(0.0)};
  const RawFrame f = capture_dark_frame(s, spec, 0);
  // Oracle: clamp(round(512 + 8 sin(pi r / 2))) for each row.
  const int cycle[4] = {512, 520, 512, 504};
  for (std::uint32_t r = 0; r < c.height; ++r) {
    const double ideal = 512.0 + 8.0 * std::sin(kPi * r / 2.0);
    ASSERT_EQ(static_cast<int>(std::lround(ideal)), cycle[r % 4]);
    for (std::uint32_t col = 0; col < c.width; ++col) EXPECT_EQ(f.at(r, col), cycle[r % 4]) << r << "," << col;
  }
  ASSERT_TRUE(f.metadata.phase_rad.has_value());
  EXPECT_EQ(*f.metadata.phase_rad, 0.0);
}

TEST(CaptureDarkFrame, RoundsHalfAwayFromZero) {
  SensorConfig c = quiet_config();
  c.black_level = 100;
  const Sensor s(c);
  // Quarter-rate ripple of amplitude 0.5 puts rows exactly on x.5 boundaries.
  const RawFrame f = capture_dark_frame(s, {c.row_rate() / 4.0, 0.5, PhasePolicy::fixed(0.0)}, 0);
  EXPECT_EQ(f.at(1, 0), 101);  // 100.5
  EXPECT_EQ(f.at(3, 0), 100);  // 99.5 -> 100 (away from zero)
}

TEST(CaptureDarkFrame, Deterministic) {
  SensorConfig c = quiet_config();
  c.read_noise_sigma = 2.0;
  c.row_fpn_sigma = 0.5;
  c.col_fpn_sigma = 0.5;
  const Sensor a(c);
  const Sensor b(c);
  const SupplyNoiseSpec spec{3456.0, 0.8, PhasePolicy::per_frame_random()};
  EXPECT_EQ(capture_dark_frame(a, spec, 11), capture_dark_frame(b, spec, 11));
  EXPECT_NE(capture_dark_frame(a, spec, 11).pixels, capture_dark_frame(a, spec, 12).pixels);
}

TEST(CaptureDarkFrame, IndependentOfCallOrderAndThreads) {
  SensorConfig c = quiet_config();
  c.read_noise_sigma = 3.0;
  const Sensor s(c);
  const SupplyNoiseSpec spec{900.0, 2.0, PhasePolicy::per_frame_random()};
  std::vector<RawFrame> forward;
  for (std::uint64_t k = 0; k < 8; ++k) forward.push_back(capture_dark_frame(s, spec, k));
  std::vector<RawFrame> threaded(8);
  {
    std::vector<std::jthread> workers;
    for (std::uint64_t k = 8; k-- > 0;) {
      workers.emplace_back([&, k] { threaded[k] = capture_dark_frame(s, spec, k); });
    }
  }
  EXPECT_EQ(forward, threaded);
}

TEST(CaptureDarkFrame, ZeroAmplitudeAndZeroFrequencyAreEquivalent) {
  SensorConfig c = quiet_config();
  c.read_noise_sigma = 2.0;
  c.row_fpn_sigma = 1.0;
  const Sensor s(c);
  for (std::uint64_t k = 0; k < 4; ++k) {
    const RawFrame no_amp = capture_dark_frame(s, {5000.0, 0.0, PhasePolicy::per_frame_random()}, k);
    const RawFrame no_freq = capture_dark_frame(s, {0.0, 5.0, PhasePolicy::per_frame_random()}, k);
    EXPECT_EQ(no_amp.pixels, no_freq.pixels);
    EXPECT_EQ(no_amp.metadata.phase_rad, no_freq.metadata.phase_rad);
  }
}

TEST(CaptureDarkFrame, PerFrameRandomPhaseIsKeyedByFrame) {
  const Sensor s(quiet_config());
  const SupplyNoiseSpec spec{1000.0, 1.0, PhasePolicy::per_frame_random()};
  const double p0 = s.frame_phase(spec, StreamKey{5}, 0);
  const double p1 = s.frame_phase(spec, StreamKey{5}, 1);
  EXPECT_NE(p0, p1);
  EXPECT_EQ(p0, s.frame_phase(spec, StreamKey{5}, 0));
  EXPECT_NE(p0, s.frame_phase(spec, StreamKey{6}, 0));
  EXPECT_GE(p0, 0.0);
  EXPECT_LT(p0, 2 * kPi);
}

TEST(CaptureDarkFrame, AliasedFrequenciesGiveIdenticalFrames) {
  SensorConfig c = quiet_config();
  c.read_noise_sigma = 2.0;
  c.row_fpn_sigma = 0.5;
  const Sensor s(c);
  for (double f : {321.0, 4096.5, 12000.0}) {
    const RawFrame a = capture_dark_frame(s, {f, 4.0, PhasePolicy::fixed(0.25)}, 3);
    const RawFrame b = capture_dark_frame(s, {f + c.row_rate(), 4.0, PhasePolicy::fixed(0.25)}, 3);
    EXPECT_EQ(a.pixels, b.pixels);
  }
}

// Property: no parameter combination pushes a pixel outside the ADC range.
TEST(CaptureDarkFrame, ClampSafetyUnderExtremeInjection) {
  std::mt19937_64 gen(12345);
  std::uniform_int_distribution<std::uint32_t> depth(8, 16);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    SensorConfig c = quiet_config();
    c.bit_depth = depth(gen);
    c.black_level = static_cast<std::uint32_t>(unit(gen) * c.max_value());
    c.read_noise_sigma = 50.0 * unit(gen);
    c.row_fpn_sigma = 1000.0 * unit(gen);
    c.col_fpn_sigma = 1000.0 * unit(gen);
    c.coupling = CouplingTransfer::flat(1e3 * unit(gen));
    c.seed = gen();
    const Sensor s(c);
    const SupplyNoiseSpec spec{1e5 * unit(gen), 1e6 * unit(gen), PhasePolicy::per_frame_random()};
    const RawFrame f = capture_dark_frame(s, spec, static_cast<std::uint64_t>(trial));
    const auto [lo, hi] = std::minmax_element(f.pixels.begin(), f.pixels.end());
    EXPECT_LE(*hi, c.max_value());
    EXPECT_GE(*lo, 0);
  }
}

}  // namespace
}  // namespace supplyscan
