#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "semfilter/image.hpp"

namespace semfilter {

struct QualityRange {
  int min = 0;
  int max = 0;
  /// True when a larger parameter spends more bits (JPEG quality), false for QP.
  bool rate_increases = true;

  bool contains(int q) const noexcept { return q >= min && q <= max; }
};

struct EncodeResult {
  std::vector<std::uint8_t> bitstream;
  double bpp = 0.0;
  int quality = 0;
  Image reconstructed;
};

/// 8 * bytes / (width * height) of the raster that was actually encoded.
double bits_per_pixel(std::size_t bytes, int width, int height);

class CodecAdapter {
public:
  virtual ~CodecAdapter() = default;
  virtual std::string name() const = 0;
  virtual QualityRange quality_range() const = 0;
  virtual bool is_external() const = 0;
  /// File extension for kept bitstreams, dot included.
  virtual std::string bitstream_extension() const = 0;
  /// Throws CodecError; a parameter outside quality_range() is a ConfigError.
  virtual EncodeResult encode(const Image& img, int quality) const = 0;
};

/// Baseline JPEG through libjpeg, 4:2:0, standard Huffman tables. Quality 1-100.
class JpegCodec final : public CodecAdapter {
public:
  std::string name() const override { return "jpeg"; }
  QualityRange quality_range() const override { return {1, 100, true}; }
  bool is_external() const override { return false; }
  std::string bitstream_extension() const override { return ".jpg"; }
  EncodeResult encode(const Image& img, int quality) const override;
};

/// Command-line encoder/decoder pair described by a JSON template.
///
///   {
///     "name": "hevc",
///     "encoder": {"cmd": "x265", "cmd_env": "SEMFILTER_HEVC_BIN", "args": ["--qp", "{qp}", ...]},
///     "decoder": {"cmd": "ffmpeg", "cmd_env": "SEMFILTER_HEVC_DEC_BIN", "args": [...]},
///     "input_format": "yuv420p" | "png",
///     "output_format": "yuv420p" | "yuv420p10le" | "png",
///     "quality": {"min": 0, "max": 51, "rate_increases": false},
///     "bitstream_extension": ".hevc"
///   }
///
/// Placeholders in args: {input} {output} {qp} {width} {height}. The environment
/// variable, when set, overrides cmd.
struct CodecTemplate {
  struct Command {
    std::string cmd;
    std::string cmd_env;
    std::vector<std::string> args;
  };
  std::string name;
  Command encoder;
  Command decoder;
  std::string input_format = "yuv420p";
  std::string output_format = "yuv420p";
  QualityRange quality{0, 51, false};
  std::string bitstream_extension = ".bin";

  static CodecTemplate from_json(const nlohmann::json& j);
  static CodecTemplate from_file(const std::filesystem::path& path);
  /// Built-in "hevc" (x265 + ffmpeg) or "vvc" (vvencapp + vvdecapp) templates.
  static std::optional<CodecTemplate> builtin(std::string_view name);
};

class ExternalCodec final : public CodecAdapter {
public:
  explicit ExternalCodec(CodecTemplate tpl);

  std::string name() const override { return tpl_.name; }
  QualityRange quality_range() const override { return tpl_.quality; }
  bool is_external() const override { return true; }
  std::string bitstream_extension() const override { return tpl_.bitstream_extension; }
  EncodeResult encode(const Image& img, int quality) const override;

  const CodecTemplate& codec_template() const noexcept { return tpl_; }

private:
  CodecTemplate tpl_;
};

/// "jpeg", "hevc", "vvc", or a path to a JSON template. Unknown names are a ConfigError.
std::unique_ptr<CodecAdapter> make_codec(std::string_view spec);

/// One result per parameter, in order. An empty list is rejected.
std::vector<EncodeResult> measure_sweep(const CodecAdapter& codec, const Image& img, std::span<const int> params);

/// Planar 8-bit Y, Cb, Cr (BT.601 limited range); chroma planes are ceil(w/2) x ceil(h/2).
std::vector<std::uint8_t> rgb_to_yuv420(const Image& img);
/// Inverse of rgb_to_yuv420; `bit_depth` 8 or 10 (little-endian 16-bit samples).
Image yuv420_to_rgb(std::span<const std::uint8_t> yuv, int width, int height, int bit_depth = 8);

}  // namespace semfilter
