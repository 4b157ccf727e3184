#include <algorithm>
#include <cstdlib>
#include <fstream>

#include "process.hpp"
#include "semfilter/codec.hpp"
#include "semfilter/error.hpp"

namespace semfilter {
namespace {

using nlohmann::json;

// Kept in sync with share/codecs/*.json (a unit test compares them).
constexpr const char* kHevcTemplate = R"({
  "name": "hevc",
  "encoder": {
    "cmd": "x265",
    "cmd_env": "SEMFILTER_HEVC_BIN",
    "args": ["--input", "{input}", "--input-res", "{width}x{height}", "--input-csp", "i420", "--fps", "1",
             "--frames", "1", "--preset", "medium", "--qp", "{qp}", "--log-level", "error", "--output", "{output}"]
  },
  "decoder": {
    "cmd": "ffmpeg",
    "cmd_env": "SEMFILTER_HEVC_DEC_BIN",
    "args": ["-y", "-loglevel", "error", "-i", "{input}", "-f", "rawvideo", "-pix_fmt", "yuv420p", "{output}"]
  },
  "input_format": "yuv420p",
  "output_format": "yuv420p",
  "quality": {"min": 0, "max": 51, "rate_increases": false},
  "bitstream_extension": ".hevc"
})";

constexpr const char* kVvcTemplate = R"({
  "name": "vvc",
  "encoder": {
    "cmd": "vvencapp",
    "cmd_env": "SEMFILTER_VVC_BIN",
    "args": ["-i", "{input}", "-s", "{width}x{height}", "-c", "yuv420", "-r", "1", "-f", "1",
             "--preset", "medium", "-q", "{qp}", "-o", "{output}"]
  },
  "decoder": {
    "cmd": "vvdecapp",
    "cmd_env": "SEMFILTER_VVC_DEC_BIN",
    "args": ["-b", "{input}", "-o", "{output}"]
  },
  "input_format": "yuv420p",
  "output_format": "yuv420p10le",
  "quality": {"min": 0, "max": 63, "rate_increases": false},
  "bitstream_extension": ".266"
})";

CodecTemplate::Command parse_command(const json& j, const std::string& which) {
  if (!j.is_object()) throw ConfigError("codec template: '" + which + "' must be an object");
  CodecTemplate::Command c;
  c.cmd = j.value("cmd", "");
  c.cmd_env = j.value("cmd_env", "");
  if (c.cmd.empty() && c.cmd_env.empty()) throw ConfigError("codec template: '" + which + "' needs cmd or cmd_env");
  if (!j.contains("args") || !j.at("args").is_array()) {
    throw ConfigError("codec template: '" + which + "' needs an args array");
  }
  for (const auto& a : j.at("args")) {
    if (!a.is_string()) throw ConfigError("codec template: '" + which + "' args must be strings");
    c.args.push_back(a.get<std::string>());
  }
  return c;
}

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

std::filesystem::path resolve(const CodecTemplate::Command& c, const std::string& codec, const char* role) {
  std::string wanted = c.cmd;
  if (!c.cmd_env.empty()) {
    if (const char* env = std::getenv(c.cmd_env.c_str()); env != nullptr && *env != '\0') wanted = env;
  }
  if (auto exe = detail::find_executable(wanted)) return *exe;
  std::string msg = codec + " " + role + " not found";
  if (!wanted.empty()) msg += " ('" + wanted + "')";
  if (!c.cmd_env.empty()) msg += "; set " + c.cmd_env + " to the " + role + " binary";
  throw CodecError(msg);
}

std::string tail(const std::string& s, std::size_t n = 600) { return s.size() <= n ? s : "..." + s.substr(s.size() - n); }

void run_step(const CodecTemplate::Command& c, const std::filesystem::path& exe, const std::string& codec,
              const char* role, const std::vector<std::pair<std::string, std::string>>& vars,
              const std::filesystem::path& log) {
  std::vector<std::string> argv{exe.string()};
  for (std::string a : c.args) {
    for (const auto& [key, value] : vars) replace_all(a, key, value);
    argv.push_back(std::move(a));
  }
  const auto outcome = detail::run_process(argv, log);
  if (outcome.exit_code != 0) {
    throw CodecError(codec + " " + role + " exited with status " + std::to_string(outcome.exit_code) + ": " +
                     tail(outcome.output));
  }
}

bool valid_raster_format(const std::string& f, bool output) {
  return f == "yuv420p" || f == "png" || (output && f == "yuv420p10le");
}

}  // namespace

CodecTemplate CodecTemplate::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("codec template must be a JSON object");
  static const char* known[] = {"name", "encoder", "decoder", "input_format", "output_format", "quality",
                                "bitstream_extension"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw ConfigError("codec template: unknown field '" + key + "'");
    }
  }
  CodecTemplate t;
  try {
    t.name = j.at("name").get<std::string>();
    t.encoder = parse_command(j.at("encoder"), "encoder");
    t.decoder = parse_command(j.at("decoder"), "decoder");
    t.input_format = j.value("input_format", t.input_format);
    t.output_format = j.value("output_format", t.output_format);
    t.bitstream_extension = j.value("bitstream_extension", t.bitstream_extension);
    if (j.contains("quality")) {
      const auto& q = j.at("quality");
      t.quality.min = q.at("min").get<int>();
      t.quality.max = q.at("max").get<int>();
      t.quality.rate_increases = q.value("rate_increases", false);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("codec template: ") + e.what());
  }
  if (t.name.empty()) throw ConfigError("codec template: empty name");
  if (!valid_raster_format(t.input_format, false)) {
    throw ConfigError("codec template: input_format must be yuv420p or png");
  }
  if (!valid_raster_format(t.output_format, true)) {
    throw ConfigError("codec template: output_format must be yuv420p, yuv420p10le or png");
  }
  if (t.quality.min > t.quality.max) throw ConfigError("codec template: quality.min > quality.max");
  return t;
}

CodecTemplate CodecTemplate::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open codec template " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::optional<CodecTemplate> CodecTemplate::builtin(std::string_view name) {
  if (name == "hevc") return from_json(json::parse(kHevcTemplate));
  if (name == "vvc") return from_json(json::parse(kVvcTemplate));
  return std::nullopt;
}

ExternalCodec::ExternalCodec(CodecTemplate tpl) : tpl_(std::move(tpl)) {}

EncodeResult ExternalCodec::encode(const Image& img, int quality) const {
  if (!tpl_.quality.contains(quality)) {
    throw ConfigError(tpl_.name + ": quality parameter " + std::to_string(quality) + " outside [" +
                      std::to_string(tpl_.quality.min) + ", " + std::to_string(tpl_.quality.max) + "]");
  }
  if (img.empty()) throw std::invalid_argument(tpl_.name + ": empty image");
  const auto encoder = resolve(tpl_.encoder, tpl_.name, "encoder");
  const auto decoder = resolve(tpl_.decoder, tpl_.name, "decoder");

  detail::TempDir tmp;
  const auto input = tmp.path() / (tpl_.input_format == "png" ? "input.png" : "input.yuv");
  const auto bitstream = tmp.path() / ("bitstream" + tpl_.bitstream_extension);
  const auto decoded = tmp.path() / (tpl_.output_format == "png" ? "decoded.png" : "decoded.yuv");
  if (tpl_.input_format == "png") {
    save_png(img, input);
  } else {
    write_file(input, rgb_to_yuv420(img));
  }

  const std::vector<std::pair<std::string, std::string>> common{
      {"{qp}", std::to_string(quality)}, {"{width}", std::to_string(img.width())},
      {"{height}", std::to_string(img.height())}};
  auto vars = common;
  vars.emplace_back("{input}", input.string());
  vars.emplace_back("{output}", bitstream.string());
  run_step(tpl_.encoder, encoder, tpl_.name, "encoder", vars, tmp.path() / "encoder.log");

  EncodeResult r;
  r.quality = quality;
  try {
    r.bitstream = read_file(bitstream);
  } catch (const IoError&) {
    throw CodecError(tpl_.name + " encoder produced no bitstream at " + bitstream.string());
  }
  if (r.bitstream.empty()) throw CodecError(tpl_.name + " encoder produced an empty bitstream");
  r.bpp = bits_per_pixel(r.bitstream.size(), img.width(), img.height());

  vars = common;
  vars.emplace_back("{input}", bitstream.string());
  vars.emplace_back("{output}", decoded.string());
  run_step(tpl_.decoder, decoder, tpl_.name, "decoder", vars, tmp.path() / "decoder.log");

  try {
    if (tpl_.output_format == "png") {
      r.reconstructed = load_image(decoded);
    } else {
      r.reconstructed = yuv420_to_rgb(read_file(decoded), img.width(), img.height(),
                                      tpl_.output_format == "yuv420p10le" ? 10 : 8);
    }
  } catch (const IoError& e) {
    throw CodecError(tpl_.name + " decoder output unreadable: " + e.what());
  }
  if (r.reconstructed.width() != img.width() || r.reconstructed.height() != img.height()) {
    throw CodecError(tpl_.name + " decoder returned " + std::to_string(r.reconstructed.width()) + "x" +
                     std::to_string(r.reconstructed.height()) + ", expected " + std::to_string(img.width()) + "x" +
                     std::to_string(img.height()));
  }
  return r;
}

}  // namespace semfilter
