#include "supplyscan/report_io.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <sstream>

#include <json.hpp>

#include "supplyscan/config_codec.hpp"
#include "supplyscan/error.hpp"

namespace supplyscan {

namespace {

using nlohmann::json;

[[noreturn]] void malformed_csv(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::MalformedCsv, "malformed-csv: line " + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && first != last;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  for (std::string_view line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

// Fixed two-decimal coordinates keep the SVG byte-stable and compact.
std::string coord(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string xml_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tick_label(double v) {
  char buf[64];
  if (v != 0.0 && (std::abs(v) >= 1e6 || std::abs(v) < 1e-3)) {
    std::snprintf(buf, sizeof buf, "%.3g", v);
  } else if (std::abs(v) >= 1000.0 && std::fmod(v, 1000.0) == 0.0) {
    std::snprintf(buf, sizeof buf, "%gk", v / 1000.0);
  } else {
    std::snprintf(buf, sizeof buf, "%g", v);
  }
  return buf;
}

std::vector<double> linear_ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double magnitude = std::pow(10.0, std::floor(std::log10(raw)));
  double step = magnitude;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * magnitude;
    if (span / step <= 6.0) break;
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) {
    ticks.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
  }
  return ticks;
}

constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                              "#9467bd", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string write_curve_csv(const CharacterisationCurve& curve) {
  std::string out(kCurveCsvHeader);
  out += '\n';
  for (const auto& p : curve.points) {
    out += format_double(p.frequency_hz);
    out += ',';
    out += format_double(p.summary.mean_metric);
    out += ',';
    out += format_double(p.summary.std_metric);
    out += ',';
    out += std::to_string(p.summary.n_frames);
    out += '\n';
  }
  return out;
}

CharacterisationCurve read_curve_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines.front() != kCurveCsvHeader) {
    malformed_csv(1, "expected header '" + std::string(kCurveCsvHeader) + "'");
  }
  if (lines.size() < 2) malformed_csv(2, "curve has no points");

  CharacterisationCurve curve;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split(lines[i], ',');
    if (fields.size() != 4) malformed_csv(i + 1, "expected 4 fields, got " + std::to_string(fields.size()));
    CurvePoint p{0.0, {}};
    if (!parse_number(fields[0], p.frequency_hz) || !parse_number(fields[1], p.summary.mean_metric) ||
        !parse_number(fields[2], p.summary.std_metric) || !parse_number(fields[3], p.summary.n_frames)) {
      malformed_csv(i + 1, "unparseable number");
    }
    if (!std::isfinite(p.frequency_hz) || !std::isfinite(p.summary.mean_metric) || p.summary.std_metric < 0.0 ||
        p.summary.n_frames < 1) {
      malformed_csv(i + 1, "value out of range");
    }
    if (!curve.points.empty() && !(curve.points.back().frequency_hz < p.frequency_hz)) {
      throw Error(ErrorCode::NonMonotonicFrequency, "non-monotonic-frequency: line " + std::to_string(i + 1) +
                                                        " does not increase the frequency");
    }
    curve.points.push_back(std::move(p));
  }
  return curve;
}

std::string rfc3339_utc(std::chrono::system_clock::time_point when) {
  const std::time_t t = std::chrono::system_clock::to_time_t(when);
  std::tm utc{};
  gmtime_r(&t, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

RunManifest make_manifest(const SensorConfig& sensor, const SweepConfig& sweep,
                          std::chrono::system_clock::time_point when) {
  RunManifest m;
  m.timestamp = rfc3339_utc(when);
  m.sensor = sensor;
  m.sweep = sweep;
  m.run_seed = sweep.run_seed;
  m.config_fingerprint = config_fingerprint(sensor, sweep);
  return m;
}

std::string write_manifest(const RunManifest& m) {
  const json j = {
      {"tool_version", m.tool_version},
      {"timestamp", m.timestamp},
      {"sensor", to_json(m.sensor)},
      {"sweep", to_json(m.sweep)},
      {"run_seed", m.run_seed},
      {"config_fingerprint", m.config_fingerprint},
  };
  return j.dump(2) + "\n";
}

RunManifest read_manifest(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigParse, std::string("config-parse: manifest is not valid JSON: ") + e.what());
  }
  RunManifest m;
  try {
    m.tool_version = j.at("tool_version").get<std::string>();
    m.timestamp = j.at("timestamp").get<std::string>();
    m.sensor = sensor_config_from_json(j.at("sensor"));
    m.sweep = sweep_config_from_json(j.at("sweep"));
    m.run_seed = j.at("run_seed").get<std::uint64_t>();
    m.config_fingerprint = j.at("config_fingerprint").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigParse, std::string("config-parse: manifest field: ") + e.what());
  }
  return m;
}

std::string format_range_line(const CriticalRange& r) {
  return format_double(r.f_low_hz) + ',' + format_double(r.f_high_hz) + ',' + format_double(r.peak_frequency_hz) +
         ',' + format_double(r.peak_metric);
}

std::string write_ranges_csv(const std::vector<CriticalRange>& ranges) {
  std::string out(kRangesCsvHeader);
  out += '\n';
  for (const auto& r : ranges) out += format_range_line(r) + '\n';
  return out;
}

std::string write_repeatability_report(const RepeatabilityReport& report) {
  json per = json::array();
  for (const auto& d : report.per_frequency_deviation) {
    per.push_back({{"frequency_hz", d.frequency_hz}, {"relative_deviation", d.deviation}});
  }
  const json j = {
      {"n_runs", report.n_runs},
      {"max_relative_deviation", report.max_relative_deviation},
      {"per_frequency", per},
  };
  return j.dump(2) + "\n";
}

std::string render_overlay_svg(const std::vector<CharacterisationCurve>& curves,
                               const std::vector<std::string>& labels,
                               const std::vector<CriticalRange>& ranges, const PlotOptions& options) {
  if (curves.empty()) throw Error(ErrorCode::EmptyInput, "empty-input: nothing to plot");
  if (labels.size() != curves.size()) {
    throw Error(ErrorCode::LabelMismatch, "label-mismatch: " + std::to_string(labels.size()) + " labels for " +
                                              std::to_string(curves.size()) + " curves");
  }

  constexpr double kWidth = 900.0;
  constexpr double kHeight = 520.0;
  constexpr double kLeft = 80.0;
  constexpr double kRight = 190.0;
  constexpr double kTop = 50.0;
  constexpr double kBottom = 70.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  // Data extent. Log axes ignore non-positive frequencies.
  double f_min = std::numeric_limits<double>::infinity();
  double f_max = -f_min;
  double y_max = 0.0;
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      if (options.log_x && p.frequency_hz <= 0.0) continue;
      f_min = std::min(f_min, p.frequency_hz);
      f_max = std::max(f_max, p.frequency_hz);
      y_max = std::max(y_max, p.summary.mean_metric);
    }
  }
  if (!std::isfinite(f_min)) {
    f_min = 1.0;
    f_max = 10.0;
  }
  if (f_max <= f_min) {
    f_max = options.log_x ? f_min * 10.0 : f_min + 1.0;
  }
  y_max = y_max > 0.0 ? y_max * 1.05 : 1.0;

  auto x_of = [&](double f) {
    const double u = options.log_x ? std::log10(f / f_min) / std::log10(f_max / f_min) : (f - f_min) / (f_max - f_min);
    return kLeft + std::clamp(u, 0.0, 1.0) * plot_w;
  };
  auto y_of = [&](double v) { return kTop + plot_h - std::clamp(v / y_max, 0.0, 1.0) * plot_h; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n"
      << "<text x=\"" << coord(kLeft + plot_w / 2) << "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"16\">" << xml_escape(options.title) << "</text>\n";

  for (const auto& r : ranges) {
    if (options.log_x && r.f_high_hz <= 0.0) continue;
    const double lo = options.log_x ? std::max(r.f_low_hz, f_min) : r.f_low_hz;
    const double x0 = x_of(lo);
    const double x1 = std::max(x_of(r.f_high_hz), x0 + 2.0);
    svg << "<rect class=\"critical-range\" x=\"" << coord(x0) << "\" y=\"" << coord(kTop) << "\" width=\""
        << coord(x1 - x0) << "\" height=\"" << coord(plot_h) << "\" fill=\"#ffb000\" fill-opacity=\"0.25\"/>\n";
  }

  // Axes, ticks and grid.
  svg << "<g font-family=\"sans-serif\" font-size=\"11\" stroke-width=\"1\">\n";
  std::vector<double> x_ticks;
  if (options.log_x) {
    for (double d = std::pow(10.0, std::ceil(std::log10(f_min))); d <= f_max * (1 + 1e-9); d *= 10.0) {
      x_ticks.push_back(d);
    }
  } else {
    x_ticks = linear_ticks(f_min, f_max);
  }
  for (double t : x_ticks) {
    const double x = x_of(t);
    svg << "<line x1=\"" << coord(x) << "\" y1=\"" << coord(kTop) << "\" x2=\"" << coord(x) << "\" y2=\""
        << coord(kTop + plot_h) << "\" stroke=\"#dddddd\"/>\n"
        << "<text x=\"" << coord(x) << "\" y=\"" << coord(kTop + plot_h + 16) << "\" text-anchor=\"middle\">"
        << tick_label(t) << "</text>\n";
  }
  for (double t : linear_ticks(0.0, y_max)) {
    const double y = y_of(t);
    svg << "<line x1=\"" << coord(kLeft) << "\" y1=\"" << coord(y) << "\" x2=\"" << coord(kLeft + plot_w)
        << "\" y2=\"" << coord(y) << "\" stroke=\"#dddddd\"/>\n"
        << "<text x=\"" << coord(kLeft - 6) << "\" y=\"" << coord(y + 4) << "\" text-anchor=\"end\">" << tick_label(t)
        << "</text>\n";
  }
  svg << "<rect x=\"" << coord(kLeft) << "\" y=\"" << coord(kTop) << "\" width=\"" << coord(plot_w) << "\" height=\""
      << coord(plot_h) << "\" fill=\"none\" stroke=\"black\"/>\n"
      << "<text x=\"" << coord(kLeft + plot_w / 2) << "\" y=\"" << coord(kHeight - 20)
      << "\" text-anchor=\"middle\" font-size=\"13\">Injected ripple frequency (Hz)</text>\n"
      << "<text x=\"20\" y=\"" << coord(kTop + plot_h / 2) << "\" text-anchor=\"middle\" font-size=\"13\" "
      << "transform=\"rotate(-90 20 " << coord(kTop + plot_h / 2) << ")\">Row noise (DN)</text>\n"
      << "</g>\n";

  for (std::size_t i = 0; i < curves.size(); ++i) {
    const char* colour = kPalette[i % kPalette.size()];
    svg << "<polyline class=\"curve\" fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (const auto& p : curves[i].points) {
      if (options.log_x && p.frequency_hz <= 0.0) continue;
      if (!first) svg << ' ';
      svg << coord(x_of(p.frequency_hz)) << ',' << coord(y_of(p.summary.mean_metric));
      first = false;
    }
    svg << "\"/>\n";
    const double ly = kTop + 10.0 + 20.0 * static_cast<double>(i);
    const double lx = kLeft + plot_w + 15.0;
    svg << "<line x1=\"" << coord(lx) << "\" y1=\"" << coord(ly) << "\" x2=\"" << coord(lx + 25) << "\" y2=\""
        << coord(ly) << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n"
        << "<text class=\"legend\" x=\"" << coord(lx + 32) << "\" y=\"" << coord(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(labels[i]) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace supplyscan
