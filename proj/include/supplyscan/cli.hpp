#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "supplyscan/raw_pipeline.hpp"

namespace supplyscan::cli {

enum ExitCode : int { kSuccess = 0, kValidationError = 1, kIoError = 2 };

struct SweepOptions {
  std::filesystem::path config_path;
  std::optional<std::filesystem::path> out_dir;
  unsigned repeat = 1;
  std::optional<std::uint64_t> seed;
  bool dump_frames = false;
  double k = 6.0;
  bool log_x = false;
  unsigned threads = 1;
};

/// Runs the configured sweep(s) and writes curve CSV, manifest, ranges and plot.
/// With repeat > 1, run i uses seed + (i - 1) and artefacts get a `_run<i>` suffix,
/// plus one overlay plot and a repeatability report.
int cmd_sweep(const SweepOptions& options, std::ostream& out, std::ostream& err);

/// Rebuilds a curve from a directory of PGM frames and sidecars.
int cmd_analyze(const std::filesystem::path& frames_dir, const std::filesystem::path& out_path,
                AnalysisPlane plane, std::ostream& out, std::ostream& err);

int cmd_detect(const std::filesystem::path& curve_csv, double k, std::ostream& out, std::ostream& err);

int cmd_plot(const std::vector<std::filesystem::path>& curve_csvs, const std::filesystem::path& out_svg, bool log_x,
             std::ostream& out, std::ostream& err);

/// Full command-line entry point.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace supplyscan::cli
