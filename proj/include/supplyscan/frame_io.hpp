#pragma once

// Frame interchange: 16-bit binary PGM ("P5", maxval 65535, big-endian
// samples) plus a JSON sidecar carrying the Bayer and injection metadata.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "supplyscan/sensor_model.hpp"

namespace supplyscan {

struct EncodedFrame {
  std::string pgm;
  std::string sidecar;
};

EncodedFrame write_raw_frame(const RawFrame& frame);
RawFrame read_raw_frame(std::string_view pgm, std::optional<std::string_view> sidecar);

/// Sidecar lives next to the image with the extension replaced by ".json".
std::filesystem::path sidecar_path_for(const std::filesystem::path& pgm_path);

void save_raw_frame(const RawFrame& frame, const std::filesystem::path& pgm_path);
RawFrame load_raw_frame(const std::filesystem::path& pgm_path);

}  // namespace supplyscan
