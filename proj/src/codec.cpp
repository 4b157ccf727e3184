#include "semfilter/codec.hpp"

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstdlib>

#include <jpeglib.h>

#include "semfilter/error.hpp"

namespace semfilter {

double bits_per_pixel(std::size_t bytes, int width, int height) {
  if (width < 1 || height < 1) throw std::invalid_argument("bits_per_pixel: empty raster");
  return 8.0 * static_cast<double>(bytes) / (static_cast<double>(width) * static_cast<double>(height));
}

namespace {

struct JpegEncodeError {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void on_encode_error(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegEncodeError*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// No non-trivial locals, so longjmp cannot skip a destructor.
bool jpeg_encode_raw(const std::uint8_t* rgb, int width, int height, int quality, unsigned char** out,
                     unsigned long* size, char* message) {
  jpeg_compress_struct cinfo;
  JpegEncodeError jerr;
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = on_encode_error;
  *out = nullptr;
  *size = 0;
  if (setjmp(jerr.jump)) {
    std::snprintf(message, JMSG_LENGTH_MAX, "%s", jerr.message);
    jpeg_destroy_compress(&cinfo);
    std::free(*out);
    *out = nullptr;
    return false;
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, out, size);
  cinfo.image_width = static_cast<JDIMENSION>(width);
  cinfo.image_height = static_cast<JDIMENSION>(height);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  const std::size_t stride = static_cast<std::size_t>(width) * 3;
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = const_cast<JSAMPROW>(rgb + stride * cinfo.next_scanline);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  return true;
}

void check_quality(const CodecAdapter& codec, int quality) {
  const auto r = codec.quality_range();
  if (!r.contains(quality)) {
    throw ConfigError(codec.name() + ": quality parameter " + std::to_string(quality) + " outside [" +
                      std::to_string(r.min) + ", " + std::to_string(r.max) + "]");
  }
}

}  // namespace

EncodeResult JpegCodec::encode(const Image& img, int quality) const {
  check_quality(*this, quality);
  if (img.empty()) throw std::invalid_argument("jpeg: empty image");
  unsigned char* buf = nullptr;
  unsigned long size = 0;
  char message[JMSG_LENGTH_MAX] = {};
  if (!jpeg_encode_raw(img.data().data(), img.width(), img.height(), quality, &buf, &size, message)) {
    throw CodecError(std::string("jpeg encode failed: ") + message);
  }
  EncodeResult r;
  r.bitstream.assign(buf, buf + size);
  std::free(buf);
  r.quality = quality;
  r.bpp = bits_per_pixel(r.bitstream.size(), img.width(), img.height());
  try {
    r.reconstructed = decode_image(r.bitstream);
  } catch (const Error& e) {
    throw CodecError(std::string("jpeg decode failed: ") + e.what());
  }
  return r;
}

std::unique_ptr<CodecAdapter> make_codec(std::string_view spec) {
  if (spec == "jpeg" || spec == "jpg") return std::make_unique<JpegCodec>();
  if (auto tpl = CodecTemplate::builtin(spec)) return std::make_unique<ExternalCodec>(std::move(*tpl));
  const std::filesystem::path path(spec);
  if (path.extension() == ".json") return std::make_unique<ExternalCodec>(CodecTemplate::from_file(path));
  throw ConfigError("unknown codec '" + std::string(spec) + "' (expected jpeg, hevc, vvc or a .json template)");
}

std::vector<EncodeResult> measure_sweep(const CodecAdapter& codec, const Image& img, std::span<const int> params) {
  if (params.empty()) throw std::invalid_argument("measure_sweep: empty parameter list");
  std::vector<EncodeResult> out;
  out.reserve(params.size());
  for (int q : params) out.push_back(codec.encode(img, q));
  return out;
}

// ---- YUV 4:2:0, BT.601 limited range --------------------------------------------

std::vector<std::uint8_t> rgb_to_yuv420(const Image& img) {
  const int w = img.width();
  const int h = img.height();
  const int cw = (w + 1) / 2;
  const int ch = (h + 1) / 2;
  const std::size_t luma = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  const std::size_t chroma = static_cast<std::size_t>(cw) * static_cast<std::size_t>(ch);
  std::vector<std::uint8_t> out(luma + 2 * chroma);
  std::vector<double> cb(luma);
  std::vector<double> cr(luma);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double r = img(x, y, 0) / 255.0;
      const double g = img(x, y, 1) / 255.0;
      const double b = img(x, y, 2) / 255.0;
      const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
      out[i] = to_u8(16.0 + 65.481 * r + 128.553 * g + 24.966 * b);
      cb[i] = 128.0 - 37.797 * r - 74.203 * g + 112.0 * b;
      cr[i] = 128.0 + 112.0 * r - 93.786 * g - 18.214 * b;
    }
  }
  for (int cy = 0; cy < ch; ++cy) {
    for (int cx = 0; cx < cw; ++cx) {
      double sb = 0.0;
      double sr = 0.0;
      int n = 0;
      for (int y = 2 * cy; y < std::min(h, 2 * cy + 2); ++y) {
        for (int x = 2 * cx; x < std::min(w, 2 * cx + 2); ++x) {
          const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
          sb += cb[i];
          sr += cr[i];
          ++n;
        }
      }
      const std::size_t j = static_cast<std::size_t>(cy) * static_cast<std::size_t>(cw) + static_cast<std::size_t>(cx);
      out[luma + j] = to_u8(sb / n);
      out[luma + chroma + j] = to_u8(sr / n);
    }
  }
  return out;
}

Image yuv420_to_rgb(std::span<const std::uint8_t> yuv, int width, int height, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 10) throw std::invalid_argument("yuv420_to_rgb: bit depth must be 8 or 10");
  const int cw = (width + 1) / 2;
  const int ch = (height + 1) / 2;
  const std::size_t luma = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  const std::size_t chroma = static_cast<std::size_t>(cw) * static_cast<std::size_t>(ch);
  const std::size_t bytes_per_sample = bit_depth == 8 ? 1 : 2;
  const std::size_t expected = (luma + 2 * chroma) * bytes_per_sample;
  if (yuv.size() != expected) {
    throw CodecError("decoded YUV has " + std::to_string(yuv.size()) + " bytes, expected " +
                     std::to_string(expected) + " for " + std::to_string(width) + "x" + std::to_string(height));
  }
  const double scale = bit_depth == 8 ? 1.0 : 0.25;
  auto sample = [&](std::size_t i) -> double {
    if (bytes_per_sample == 1) return yuv[i];
    return scale * static_cast<double>(yuv[2 * i] | (yuv[2 * i + 1] << 8));
  };
  Image out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t j = static_cast<std::size_t>(y / 2) * static_cast<std::size_t>(cw) + static_cast<std::size_t>(x / 2);
      const double Y = 1.164383 * (sample(static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                                          static_cast<std::size_t>(x)) -
                                   16.0);
      const double Cb = sample(luma + j) - 128.0;
      const double Cr = sample(luma + chroma + j) - 128.0;
      out(x, y, 0) = to_u8(Y + 1.596027 * Cr);
      out(x, y, 1) = to_u8(Y - 0.391762 * Cb - 0.812968 * Cr);
      out(x, y, 2) = to_u8(Y + 2.017232 * Cb);
    }
  }
  return out;
}

}  // namespace semfilter
