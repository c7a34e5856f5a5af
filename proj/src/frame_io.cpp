#include "supplyscan/frame_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "supplyscan/error.hpp"

namespace supplyscan {

namespace {

using nlohmann::json;

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::MalformedHeader, "malformed-header: " + what);
}

class HeaderCursor {
public:
  explicit HeaderCursor(std::string_view bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::uint64_t number(const char* field) {
    skip_space_and_comments();
    std::uint64_t value = 0;
    const char* first = bytes_.data() + pos_;
    const char* last = bytes_.data() + bytes_.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr == first) malformed(std::string("expected ") + field);
    pos_ += static_cast<std::size_t>(ptr - first);
    return value;
  }

  /// Exactly one whitespace byte separates maxval from the raster.
  void single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      malformed("missing whitespace before raster");
    }
    ++pos_;
  }

  std::size_t position() const noexcept { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

json sidecar_json(const RawFrame& frame) {
  json j;
  j["bit_depth"] = frame.bit_depth;
  j["bayer_pattern"] = std::string(to_string(frame.bayer_pattern));
  j["black_level"] = frame.black_level;
  j["frame_index"] = frame.frame_index;
  const FrameMetadata& m = frame.metadata;
  if (m.seed) j["seed"] = *m.seed;
  if (m.frequency_hz) j["frequency_hz"] = *m.frequency_hz;
  if (m.amplitude_v) j["amplitude_v"] = *m.amplitude_v;
  if (m.phase_rad) j["phase_rad"] = *m.phase_rad;
  if (m.role != FrameRole::Unspecified) j["role"] = std::string(to_string(m.role));
  if (m.step_index) j["step_index"] = *m.step_index;
  return j;
}

void apply_sidecar(RawFrame& frame, std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedHeader, std::string("malformed-header: sidecar is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) malformed("sidecar must be a JSON object");
  static const std::vector<std::string> known{"bit_depth", "bayer_pattern", "black_level", "frame_index",
                                              "seed",      "frequency_hz",  "amplitude_v", "phase_rad",
                                              "role",      "step_index"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) malformed("unknown sidecar key '" + key + "'");
  }
  for (const char* required : {"bit_depth", "bayer_pattern", "black_level", "frame_index"}) {
    if (!j.contains(required)) malformed(std::string("sidecar lacks '") + required + "'");
  }
  try {
    frame.bit_depth = j.at("bit_depth").get<std::uint32_t>();
    frame.bayer_pattern = parse_bayer_pattern(j.at("bayer_pattern").get<std::string>());
    frame.black_level = j.at("black_level").get<std::uint32_t>();
    frame.frame_index = j.at("frame_index").get<std::uint64_t>();
    FrameMetadata& m = frame.metadata;
    if (j.contains("seed")) m.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("frequency_hz")) m.frequency_hz = j["frequency_hz"].get<double>();
    if (j.contains("amplitude_v")) m.amplitude_v = j["amplitude_v"].get<double>();
    if (j.contains("phase_rad")) m.phase_rad = j["phase_rad"].get<double>();
    if (j.contains("role")) m.role = parse_frame_role(j["role"].get<std::string>());
    if (j.contains("step_index")) m.step_index = j["step_index"].get<std::uint32_t>();
  } catch (const json::exception& e) {
    malformed(std::string("sidecar field has the wrong type: ") + e.what());
  } catch (const Error& e) {
    malformed(e.what());
  }
  if (frame.bit_depth < 1 || frame.bit_depth > 16) malformed("bit_depth must be in [1, 16]");
}

void check_bit_depth(const RawFrame& frame) {
  const std::uint32_t limit = (1u << frame.bit_depth) - 1u;
  for (std::size_t i = 0; i < frame.pixels.size(); ++i) {
    if (frame.pixels[i] > limit) {
      throw Error(ErrorCode::ValueExceedsBitDepth,
                  "value-exceeds-bit-depth: pixel " + std::to_string(i) + " = " +
                      std::to_string(frame.pixels[i]) + " exceeds " + std::to_string(limit));
    }
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

}  // namespace

EncodedFrame write_raw_frame(const RawFrame& frame) {
  if (frame.bit_depth < 1 || frame.bit_depth > 16) {
    throw Error(ErrorCode::InvalidConfig, "invalid-config: bit_depth must be in [1, 16]");
  }
  if (frame.pixels.size() != std::size_t{frame.width} * frame.height) {
    throw Error(ErrorCode::DimensionMismatch, "dimension-mismatch: pixel count does not match width x height");
  }
  check_bit_depth(frame);

  EncodedFrame out;
  std::ostringstream header;
  header << "P5\n" << frame.width << ' ' << frame.height << "\n65535\n";
  out.pgm = header.str();
  out.pgm.reserve(out.pgm.size() + 2 * frame.pixels.size());
  for (std::uint16_t v : frame.pixels) {
    out.pgm.push_back(static_cast<char>(v >> 8));
    out.pgm.push_back(static_cast<char>(v & 0xff));
  }
  out.sidecar = sidecar_json(frame).dump(2) + "\n";
  return out;
}

RawFrame read_raw_frame(std::string_view pgm, std::optional<std::string_view> sidecar) {
  if (!sidecar) throw Error(ErrorCode::MissingSidecar, "missing-sidecar: frame has no metadata record");
  if (pgm.size() < 2 || pgm[0] != 'P' || pgm[1] != '5') malformed("expected binary PGM magic 'P5'");

  HeaderCursor cursor(pgm);
  cursor.advance(2);
  const std::uint64_t width = cursor.number("width");
  const std::uint64_t height = cursor.number("height");
  const std::uint64_t maxval = cursor.number("maxval");
  if (maxval != 65535) malformed("only 16-bit PGM (maxval 65535) is accepted, got " + std::to_string(maxval));
  if (width == 0 || height == 0 || width > 0xffffffffu || height > 0xffffffffu) malformed("bad dimensions");
  cursor.single_space();

  const std::size_t expected = static_cast<std::size_t>(width * height * 2);
  const std::size_t available = pgm.size() - cursor.position();
  if (available != expected) {
    throw Error(ErrorCode::DimensionMismatch,
                "dimension-mismatch: header declares " + std::to_string(width) + "x" + std::to_string(height) +
                    " but raster holds " + std::to_string(available) + " bytes");
  }

  RawFrame frame;
  frame.width = static_cast<std::uint32_t>(width);
  frame.height = static_cast<std::uint32_t>(height);
  frame.pixels.resize(static_cast<std::size_t>(width * height));
  const auto* raster = reinterpret_cast<const unsigned char*>(pgm.data() + cursor.position());
  for (std::size_t i = 0; i < frame.pixels.size(); ++i) {
    frame.pixels[i] = static_cast<std::uint16_t>((raster[2 * i] << 8) | raster[2 * i + 1]);
  }
  apply_sidecar(frame, *sidecar);
  check_bit_depth(frame);
  return frame;
}

std::filesystem::path sidecar_path_for(const std::filesystem::path& pgm_path) {
  auto p = pgm_path;
  p.replace_extension(".json");
  return p;
}

void save_raw_frame(const RawFrame& frame, const std::filesystem::path& pgm_path) {
  const EncodedFrame encoded = write_raw_frame(frame);
  write_file(pgm_path, encoded.pgm);
  write_file(sidecar_path_for(pgm_path), encoded.sidecar);
}

RawFrame load_raw_frame(const std::filesystem::path& pgm_path) {
  const std::string pgm = read_file(pgm_path);
  const auto side = sidecar_path_for(pgm_path);
  if (!std::filesystem::exists(side)) {
    throw Error(ErrorCode::MissingSidecar, "missing-sidecar: no " + side.filename().string() + " for " +
                                               pgm_path.filename().string());
  }
  const std::string sidecar = read_file(side);
  return read_raw_frame(pgm, sidecar);
}

}  // namespace supplyscan
