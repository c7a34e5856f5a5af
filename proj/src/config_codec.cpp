#include "supplyscan/config_codec.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <initializer_list>
#include <iterator>
#include <limits>
#include <sstream>

#include <openssl/evp.h>

#include "supplyscan/error.hpp"

namespace supplyscan {

namespace {

using nlohmann::json;

[[noreturn]] void parse_error(const std::string& what) {
  throw Error(ErrorCode::ConfigParse, "config-parse: " + what);
}

void reject_unknown(const json& j, std::string_view section, std::initializer_list<std::string_view> known) {
  if (!j.is_object()) parse_error(std::string(section) + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      parse_error("unknown key '" + std::string(section) + "." + key + "'");
    }
  }
}

// Typed field readers; each leaves the target untouched when the key is absent.
class Reader {
public:
  Reader(const json& j, std::string_view section) : j_(j), section_(section) {}

  template <typename Unsigned>
  void unsigned_field(const char* key, Unsigned& out) const {
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned()) parse_error(name(key) + " must be a non-negative integer");
    const auto raw = v.get<std::uint64_t>();
    if (raw > std::numeric_limits<Unsigned>::max()) parse_error(name(key) + " is out of range");
    out = static_cast<Unsigned>(raw);
  }

  void number_field(const char* key, double& out) const {
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) parse_error(name(key) + " must be a number");
    out = v.get<double>();
  }

  std::optional<std::string> string_field(const char* key) const {
    if (!j_.contains(key)) return std::nullopt;
    const json& v = j_.at(key);
    if (!v.is_string()) parse_error(name(key) + " must be a string");
    return v.get<std::string>();
  }

  std::string name(const char* key) const { return std::string(section_) + "." + key; }

private:
  const json& j_;
  std::string_view section_;
};

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

json to_json(const SensorConfig& c) {
  json knots = json::array();
  for (const auto& k : c.coupling.knots()) {
    knots.push_back({{"frequency_hz", k.frequency_hz}, {"gain_dn_per_v", k.gain_dn_per_v}});
  }
  return {
      {"width", c.width},
      {"height", c.height},
      {"bit_depth", c.bit_depth},
      {"black_level", c.black_level},
      {"bayer_pattern", std::string(to_string(c.bayer_pattern))},
      {"frame_rate", c.frame_rate},
      {"v_blank_rows", c.v_blank_rows},
      {"read_noise_sigma", c.read_noise_sigma},
      {"row_fpn_sigma", c.row_fpn_sigma},
      {"col_fpn_sigma", c.col_fpn_sigma},
      {"coupling", knots},
      {"seed", c.seed},
  };
}

json to_json(const SweepConfig& c) {
  json j = {
      {"f_start_hz", c.f_start_hz},
      {"f_stop_hz", c.f_stop_hz},
      {"schedule", std::string(to_string(c.mode))},
      {"amplitude_v", c.amplitude_v},
      {"frames_per_step", c.frames_per_step},
      {"analysis_plane", std::string(to_string(c.analysis_plane))},
      {"run_seed", c.run_seed},
      {"reference_frames", c.reference_frames},
      {"f_step_hz", c.f_step_hz},
      {"points_per_decade", c.points_per_decade},
  };
  if (c.phase_policy.kind == PhasePolicy::Kind::Fixed) {
    j["phase_policy"] = "fixed";
    j["phase_rad"] = c.phase_policy.fixed_phase_rad;
  } else {
    j["phase_policy"] = "per_frame_random";
  }
  return j;
}

SensorConfig sensor_config_from_json(const json& j) {
  reject_unknown(j, "sensor",
                 {"width", "height", "bit_depth", "black_level", "bayer_pattern", "frame_rate", "v_blank_rows",
                  "read_noise_sigma", "row_fpn_sigma", "col_fpn_sigma", "coupling", "seed"});
  SensorConfig c;
  const Reader r(j, "sensor");
  r.unsigned_field("width", c.width);
  r.unsigned_field("height", c.height);
  r.unsigned_field("bit_depth", c.bit_depth);
  r.unsigned_field("black_level", c.black_level);
  if (auto p = r.string_field("bayer_pattern")) c.bayer_pattern = parse_bayer_pattern(*p);
  r.number_field("frame_rate", c.frame_rate);
  r.unsigned_field("v_blank_rows", c.v_blank_rows);
  r.number_field("read_noise_sigma", c.read_noise_sigma);
  r.number_field("row_fpn_sigma", c.row_fpn_sigma);
  r.number_field("col_fpn_sigma", c.col_fpn_sigma);
  r.unsigned_field("seed", c.seed);
  if (j.contains("coupling")) {
    const json& knots = j.at("coupling");
    if (!knots.is_array()) parse_error("sensor.coupling must be an array of knots");
    std::vector<CouplingKnot> parsed;
    for (const json& k : knots) {
      reject_unknown(k, "sensor.coupling[]", {"frequency_hz", "gain_dn_per_v"});
      CouplingKnot knot{0.0, 0.0};
      const Reader kr(k, "sensor.coupling[]");
      if (!k.contains("frequency_hz") || !k.contains("gain_dn_per_v")) {
        parse_error("sensor.coupling[] knots need frequency_hz and gain_dn_per_v");
      }
      kr.number_field("frequency_hz", knot.frequency_hz);
      kr.number_field("gain_dn_per_v", knot.gain_dn_per_v);
      parsed.push_back(knot);
    }
    c.coupling = CouplingTransfer(std::move(parsed));
  }
  c.validate();
  return c;
}

SweepConfig sweep_config_from_json(const json& j) {
  reject_unknown(j, "sweep",
                 {"f_start_hz", "f_stop_hz", "schedule", "f_step_hz", "points_per_decade", "amplitude_v",
                  "frames_per_step", "analysis_plane", "run_seed", "reference_frames", "phase_policy",
                  "phase_rad"});
  SweepConfig c;
  const Reader r(j, "sweep");
  r.number_field("f_start_hz", c.f_start_hz);
  r.number_field("f_stop_hz", c.f_stop_hz);
  if (auto s = r.string_field("schedule")) c.mode = parse_schedule_mode(*s);
  r.number_field("f_step_hz", c.f_step_hz);
  r.number_field("points_per_decade", c.points_per_decade);
  r.number_field("amplitude_v", c.amplitude_v);
  r.unsigned_field("frames_per_step", c.frames_per_step);
  if (auto p = r.string_field("analysis_plane")) c.analysis_plane = parse_analysis_plane(*p);
  r.unsigned_field("run_seed", c.run_seed);
  r.unsigned_field("reference_frames", c.reference_frames);
  if (auto p = r.string_field("phase_policy")) {
    if (*p == "fixed") {
      c.phase_policy = PhasePolicy::fixed(0.0);
    } else if (*p == "per_frame_random") {
      c.phase_policy = PhasePolicy::per_frame_random();
    } else {
      parse_error("sweep.phase_policy must be 'fixed' or 'per_frame_random'");
    }
  }
  if (j.contains("phase_rad")) {
    if (c.phase_policy.kind != PhasePolicy::Kind::Fixed) parse_error("sweep.phase_rad requires phase_policy 'fixed'");
    r.number_field("phase_rad", c.phase_policy.fixed_phase_rad);
  }
  c.validate();
  return c;
}

std::string canonical_config_text(const SensorConfig& sensor, const SweepConfig& sweep) {
  const json j = {{"sensor", to_json(sensor)}, {"sweep", to_json(sweep)}};
  return j.dump();
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::Io, "SHA-256 digest failed");
  }
  std::ostringstream hex;
  hex << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < length; ++i) hex << std::setw(2) << static_cast<int>(digest[i]);
  return hex.str();
}

std::string config_fingerprint(const SensorConfig& sensor, const SweepConfig& sweep) {
  return sha256_hex(canonical_config_text(sensor, sweep));
}

RunConfigFile parse_run_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    parse_error(std::string("not valid JSON: ") + e.what());
  }
  reject_unknown(j, "config", {"sensor", "sweep", "output_dir"});
  RunConfigFile file;
  file.sensor = sensor_config_from_json(j.value("sensor", json::object()));
  file.sweep = sweep_config_from_json(j.value("sweep", json::object()));
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) parse_error("config.output_dir must be a string");
    file.output_dir = j["output_dir"].get<std::string>();
  }
  return file;
}

RunConfigFile load_run_config(const std::filesystem::path& path) { return parse_run_config(read_text(path)); }

}  // namespace supplyscan
