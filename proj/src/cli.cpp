#include "supplyscan/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "supplyscan/config_codec.hpp"
#include "supplyscan/error.hpp"
#include "supplyscan/frame_io.hpp"
#include "supplyscan/report_io.hpp"
#include "supplyscan/sweep_harness.hpp"

namespace supplyscan::cli {

namespace fs = std::filesystem;

namespace {

int exit_code_for(const Error& e) { return e.code() == ErrorCode::Io ? kIoError : kValidationError; }

void write_text(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::Io, "cannot create directory " + dir.string());
}

std::string padded(std::uint64_t value, int width) {
  std::string s = std::to_string(value);
  if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
  return s;
}

std::string frame_file_name(const RawFrame& frame) {
  if (frame.metadata.role == FrameRole::Reference) return "reference_f" + padded(frame.frame_index, 5) + ".pgm";
  return "step" + padded(frame.metadata.step_index.value_or(0), 5) + "_f" + padded(frame.frame_index, 5) + ".pgm";
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  }
}

}  // namespace

int cmd_sweep(const SweepOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfigFile config = load_run_config(options.config_path);
    if (options.seed) {
      config.sweep.run_seed = *options.seed;
      config.sweep.validate();
    }
    if (options.repeat < 1) throw Error(ErrorCode::InvalidConfig, "invalid-config: --repeat must be >= 1");
    const std::optional<fs::path> out_dir = options.out_dir ? options.out_dir : config.output_dir;
    if (!out_dir) throw Error(ErrorCode::InvalidConfig, "invalid-config: no output directory (--out or output_dir)");
    ensure_directory(*out_dir);

    const Sensor sensor(config.sensor);
    std::vector<CharacterisationCurve> curves;
    std::vector<std::string> labels;
    std::vector<CriticalRange> first_ranges;
    const bool repeated = options.repeat > 1;

    for (unsigned run = 1; run <= options.repeat; ++run) {
      SweepConfig sweep = config.sweep;
      sweep.run_seed = config.sweep.run_seed + (run - 1);
      const std::string suffix = repeated ? "_run" + std::to_string(run) : "";

      SweepExecution execution;
      execution.threads = options.threads;
      if (options.dump_frames) {
        const fs::path frames_dir = repeated ? *out_dir / "frames" / ("run" + std::to_string(run)) : *out_dir / "frames";
        ensure_directory(frames_dir);
        execution.frame_sink = [frames_dir](const RawFrame& frame) {
          save_raw_frame(frame, frames_dir / frame_file_name(frame));
        };
      }

      CharacterisationCurve curve = run_sweep(sensor, sweep, execution);
      write_text(*out_dir / ("curve" + suffix + ".csv"), write_curve_csv(curve));
      write_text(*out_dir / ("manifest" + suffix + ".json"), write_manifest(make_manifest(config.sensor, sweep)));
      std::vector<CriticalRange> ranges;
      if (curve.points.size() >= 3) ranges = detect_critical_ranges(curve, options.k);
      write_text(*out_dir / ("ranges" + suffix + ".csv"), write_ranges_csv(ranges));
      out << "run " << run << ": " << curve.points.size() << " points, " << ranges.size()
          << " critical range(s), seed " << sweep.run_seed << '\n';
      if (run == 1) first_ranges = ranges;
      labels.push_back(repeated ? "run " + std::to_string(run) + " (seed " + std::to_string(sweep.run_seed) + ")"
                                : "seed " + std::to_string(sweep.run_seed));
      curves.push_back(std::move(curve));
    }

    PlotOptions plot;
    plot.log_x = options.log_x;
    if (repeated) {
      const RepeatabilityReport report = compare_runs(curves);
      write_text(*out_dir / "repeatability.json", write_repeatability_report(report));
      out << "max relative deviation across runs: " << format_double(report.max_relative_deviation) << '\n';
      write_text(*out_dir / "plot.svg", render_overlay_svg(curves, labels, {}, plot));
    } else {
      write_text(*out_dir / "plot.svg", render_overlay_svg(curves, labels, first_ranges, plot));
    }
    return int{kSuccess};
  });
}

int cmd_analyze(const fs::path& frames_dir, const fs::path& out_path, AnalysisPlane plane, std::ostream& out,
                std::ostream& err) {
  return guarded(err, [&] {
    if (!fs::is_directory(frames_dir)) throw Error(ErrorCode::Io, "not a directory: " + frames_dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(frames_dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error(ErrorCode::EmptyInput, "no frames found in " + frames_dir.string());

    std::vector<RawFrame> reference_frames;
    std::map<double, std::vector<RawFrame>> groups;
    std::vector<std::string> unlabelled;
    std::optional<std::pair<std::uint32_t, std::uint32_t>> shape;
    for (const auto& path : files) {
      RawFrame frame = load_raw_frame(path);
      const std::pair dims{frame.width, frame.height};
      if (!shape) shape = dims;
      if (dims != *shape) {
        throw Error(ErrorCode::InconsistentDimensions,
                    "inconsistent-dimensions: " + path.filename().string() + " is " + std::to_string(dims.first) +
                        "x" + std::to_string(dims.second) + ", expected " + std::to_string(shape->first) + "x" +
                        std::to_string(shape->second));
      }
      if (frame.metadata.role == FrameRole::Reference) {
        reference_frames.push_back(std::move(frame));
      } else if (!frame.metadata.frequency_hz) {
        unlabelled.push_back(path.filename().string());
      } else {
        const double f = *frame.metadata.frequency_hz;
        groups[f].push_back(std::move(frame));
      }
    }
    if (!unlabelled.empty()) {
      std::string listing;
      for (const auto& name : unlabelled) listing += "\n  " + name;
      throw Error(ErrorCode::MissingSidecar,
                  "frames lacking frequency_hz metadata:" + listing);
    }
    if (groups.empty()) throw Error(ErrorCode::EmptyInput, "no frames found with injection metadata");

    auto by_index = [](const RawFrame& a, const RawFrame& b) { return a.frame_index < b.frame_index; };
    auto to_planes = [plane](const std::vector<RawFrame>& frames) {
      std::vector<Plane> planes;
      planes.reserve(frames.size());
      for (const auto& f : frames) planes.push_back(analysis_plane(f, plane));
      return planes;
    };

    std::optional<RowReference> reference;
    if (!reference_frames.empty()) {
      std::sort(reference_frames.begin(), reference_frames.end(), by_index);
      reference = capture_reference(to_planes(reference_frames));
    }

    CharacterisationCurve curve;
    for (auto& [frequency, frames] : groups) {
      std::sort(frames.begin(), frames.end(), by_index);
      curve.points.push_back({frequency, row_noise_burst(to_planes(frames), reference)});
    }
    if (out_path.has_parent_path()) ensure_directory(out_path.parent_path());
    write_text(out_path, write_curve_csv(curve));
    out << "analyzed " << files.size() << " frame(s) into " << curve.points.size() << " point(s)"
        << (reference ? " with reference correction" : "") << '\n';
    return int{kSuccess};
  });
}

int cmd_detect(const fs::path& curve_csv, double k, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const CharacterisationCurve curve = read_curve_csv(read_text(curve_csv));
    for (const auto& r : detect_critical_ranges(curve, k)) out << format_range_line(r) << '\n';
    return int{kSuccess};
  });
}

int cmd_plot(const std::vector<fs::path>& curve_csvs, const fs::path& out_svg, bool log_x, std::ostream& out,
             std::ostream& err) {
  return guarded(err, [&] {
    std::vector<CharacterisationCurve> curves;
    std::vector<std::string> labels;
    for (const auto& path : curve_csvs) {
      curves.push_back(read_curve_csv(read_text(path)));
      labels.push_back(path.stem().string());
    }
    PlotOptions plot;
    plot.log_x = log_x;
    write_text(out_svg, render_overlay_svg(curves, labels, {}, plot));
    out << "wrote " << out_svg.string() << " (" << curves.size() << " curve(s))\n";
    return int{kSuccess};
  });
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulated CMOS sensor supply-ripple susceptibility characterisation"};
  app.require_subcommand(1);

  SweepOptions sweep;
  std::string sweep_config;
  std::string sweep_out;
  std::uint64_t sweep_seed = 0;
  sweep.threads = std::max(1u, std::thread::hardware_concurrency());
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a simulated frequency sweep");
  sweep_cmd->add_option("--config", sweep_config, "Run configuration (JSON)")->required();
  sweep_cmd->add_option("--out", sweep_out, "Output directory (overrides output_dir)");
  sweep_cmd->add_option("--repeat", sweep.repeat, "Number of runs with consecutive seeds")->check(CLI::PositiveNumber);
  auto* seed_opt = sweep_cmd->add_option("--seed", sweep_seed, "Run seed (overrides sweep.run_seed)");
  sweep_cmd->add_flag("--dump-frames", sweep.dump_frames, "Write every captured frame as PGM + sidecar");
  sweep_cmd->add_option("--k", sweep.k, "Critical-range threshold in robust sigmas");
  sweep_cmd->add_flag("--log-x", sweep.log_x, "Logarithmic frequency axis in the plot");
  sweep_cmd->add_option("--threads", sweep.threads, "Worker threads for sweep steps")->check(CLI::PositiveNumber);

  std::string analyze_dir;
  std::string analyze_out;
  std::string analyze_plane = "G1";
  auto* analyze_cmd = app.add_subcommand("analyze", "Build a curve from captured frames");
  analyze_cmd->add_option("frames_dir", analyze_dir, "Directory of PGM frames with JSON sidecars")->required();
  analyze_cmd->add_option("--out", analyze_out, "Output curve CSV")->required();
  analyze_cmd->add_option("--plane", analyze_plane, "Analysis plane: G1 or LUMA");

  std::string detect_csv;
  double detect_k = kDefaultCriticalK;
  auto* detect_cmd = app.add_subcommand("detect", "Print critical frequency ranges of a curve");
  detect_cmd->add_option("curve_csv", detect_csv, "Curve CSV")->required();
  detect_cmd->add_option("--k", detect_k, "Threshold in robust sigmas above the median");

  std::vector<std::string> plot_csvs;
  std::string plot_out;
  bool plot_log_x = false;
  auto* plot_cmd = app.add_subcommand("plot", "Overlay curves into an SVG");
  plot_cmd->add_option("curve_csvs", plot_csvs, "Curve CSVs")->required();
  plot_cmd->add_option("--out", plot_out, "Output SVG")->required();
  plot_cmd->add_flag("--log-x", plot_log_x, "Logarithmic frequency axis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  }

  if (sweep_cmd->parsed()) {
    sweep.config_path = sweep_config;
    if (!sweep_out.empty()) sweep.out_dir = sweep_out;
    if (seed_opt->count() > 0) sweep.seed = sweep_seed;
    return cmd_sweep(sweep, out, err);
  }
  if (analyze_cmd->parsed()) {
    AnalysisPlane plane;
    try {
      plane = parse_analysis_plane(analyze_plane);
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return kValidationError;
    }
    return cmd_analyze(analyze_dir, analyze_out, plane, out, err);
  }
  if (detect_cmd->parsed()) return cmd_detect(detect_csv, detect_k, out, err);
  if (plot_cmd->parsed()) return cmd_plot(std::vector<fs::path>(plot_csvs.begin(), plot_csvs.end()), plot_out,
                                          plot_log_x, out, err);
  return kValidationError;
}

}  // namespace supplyscan::cli
