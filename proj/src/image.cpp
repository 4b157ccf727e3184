#include "semfilter/image.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>

#include <jpeglib.h>
#include <png.h>

#include "semfilter/error.hpp"

namespace semfilter {

Image::Image(int width, int height) : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("image dimensions must be positive, got " + std::to_string(width) + "x" +
                                std::to_string(height));
  }
  data_.assign(pixel_count() * kChannels, 0);
}

Image::Image(int width, int height, std::vector<std::uint8_t> data) : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("image dimensions must be positive, got " + std::to_string(width) + "x" +
                                std::to_string(height));
  }
  if (data.size() != pixel_count() * kChannels) {
    throw std::invalid_argument("image buffer holds " + std::to_string(data.size()) + " samples, expected " +
                                std::to_string(pixel_count() * kChannels));
  }
  data_ = std::move(data);
}

std::uint8_t to_u8(double v) noexcept {
  if (!(v > 0.0)) return 0;
  if (v >= 255.0) return 255;
  return static_cast<std::uint8_t>(std::lround(v));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

namespace {

[[noreturn]] void unreadable(const std::string& why) { throw IoError("unreadable image: " + why); }

Image make_checked(long long w, long long h, std::vector<std::uint8_t> data) {
  if (w < 1 || h < 1) unreadable("zero-dimension image");
  if (w > (1 << 16) || h > (1 << 16)) unreadable("dimensions too large");
  return Image(static_cast<int>(w), static_cast<int>(h), std::move(data));
}

// ---- PNG -------------------------------------------------------------------

Image decode_png(std::span<const std::uint8_t> bytes) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    unreadable(png.message);
  }
  png.format = PNG_FORMAT_RGB;
  if (png.width == 0 || png.height == 0) {
    png_image_free(&png);
    unreadable("zero-dimension image");
  }
  std::vector<std::uint8_t> data(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, data.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    unreadable(msg);
  }
  return make_checked(png.width, png.height, std::move(data));
}

// ---- PPM (P5 / P6, binary) ---------------------------------------------------

Image decode_ppm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 2;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> long long {
    skip_space();
    long long v = 0;
    std::size_t digits = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > (1LL << 31)) unreadable("malformed PNM header");
      ++pos;
      ++digits;
    }
    if (digits == 0) unreadable("malformed PNM header");
    return v;
  };
  const bool gray = bytes[1] == '5';
  const long long w = read_int();
  const long long h = read_int();
  const long long maxval = read_int();
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) unreadable("malformed PNM header");
  ++pos;
  if (maxval < 1 || maxval > 65535) unreadable("unsupported PNM maxval");
  if (w < 1 || h < 1) unreadable("zero-dimension image");
  const std::size_t channels = gray ? 1 : 3;
  const std::size_t sample_bytes = maxval > 255 ? 2 : 1;
  const std::size_t need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * channels * sample_bytes;
  if (bytes.size() - pos < need) unreadable("truncated PNM data");

  std::vector<std::uint8_t> data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3);
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      const std::size_t src = (i * channels + (gray ? 0 : c)) * sample_bytes + pos;
      unsigned v = bytes[src];
      if (sample_bytes == 2) v = (v << 8) | bytes[src + 1];
      data[i * 3 + c] =
          maxval == 255 ? static_cast<std::uint8_t>(v) : to_u8(255.0 * static_cast<double>(v) / static_cast<double>(maxval));
    }
  }
  return make_checked(w, h, std::move(data));
}

// ---- BMP (uncompressed 8/24/32-bit) --------------------------------------------

std::uint32_t le32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}
std::uint16_t le16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

Image decode_bmp(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 54) unreadable("truncated BMP header");
  const std::uint32_t offset = le32(bytes, 10);
  const std::uint32_t header = le32(bytes, 14);
  if (header < 40) unreadable("unsupported BMP header");
  const auto w = static_cast<std::int32_t>(le32(bytes, 18));
  const auto h_signed = static_cast<std::int32_t>(le32(bytes, 22));
  const std::uint16_t bpp = le16(bytes, 28);
  const std::uint32_t compression = le32(bytes, 30);
  if (compression != 0 && !(compression == 3 && bpp == 32)) unreadable("compressed BMP not supported");
  if (bpp != 8 && bpp != 24 && bpp != 32) unreadable("unsupported BMP bit depth");
  const bool bottom_up = h_signed > 0;
  const long long h = bottom_up ? h_signed : -static_cast<long long>(h_signed);
  if (w < 1 || h < 1) unreadable("zero-dimension image");

  std::vector<std::array<std::uint8_t, 3>> palette;
  if (bpp == 8) {
    std::uint32_t colors = le32(bytes, 46);
    if (colors == 0) colors = 256;
    const std::size_t pal_at = 14 + header;
    if (bytes.size() < pal_at + colors * 4) unreadable("truncated BMP palette");
    for (std::uint32_t i = 0; i < colors; ++i) {
      palette.push_back({bytes[pal_at + i * 4 + 2], bytes[pal_at + i * 4 + 1], bytes[pal_at + i * 4]});
    }
  }
  const std::size_t row_bytes = ((static_cast<std::size_t>(w) * bpp + 31) / 32) * 4;
  if (bytes.size() < offset + row_bytes * static_cast<std::size_t>(h)) unreadable("truncated BMP data");

  std::vector<std::uint8_t> data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3);
  for (long long y = 0; y < h; ++y) {
    const long long src_row = bottom_up ? h - 1 - y : y;
    const std::size_t row_at = offset + static_cast<std::size_t>(src_row) * row_bytes;
    for (long long x = 0; x < w; ++x) {
      std::uint8_t* dst = &data[(static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)) * 3];
      if (bpp == 8) {
        const std::uint8_t idx = bytes[row_at + static_cast<std::size_t>(x)];
        if (idx >= palette.size()) unreadable("BMP palette index out of range");
        std::copy(palette[idx].begin(), palette[idx].end(), dst);
      } else {
        const std::size_t px = row_at + static_cast<std::size_t>(x) * (bpp / 8);
        dst[0] = bytes[px + 2];
        dst[1] = bytes[px + 1];
        dst[2] = bytes[px];
      }
    }
  }
  return make_checked(w, h, std::move(data));
}

// ---- JPEG ------------------------------------------------------------------------

struct JpegErrorManager {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// Kept free of non-trivial locals so the longjmp never skips a destructor.
bool jpeg_decode_raw(const std::uint8_t* src, std::size_t size, std::uint8_t** out, unsigned* w, unsigned* h,
                     char* message) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager jerr;
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_exit;
  jerr.message[0] = '\0';
  *out = nullptr;
  if (setjmp(jerr.jump)) {
    std::strncpy(message, jerr.message, JMSG_LENGTH_MAX);
    jpeg_destroy_decompress(&cinfo);
    std::free(*out);
    *out = nullptr;
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, src, static_cast<unsigned long>(size));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  *w = cinfo.output_width;
  *h = cinfo.output_height;
  const std::size_t stride = static_cast<std::size_t>(cinfo.output_width) * 3;
  *out = static_cast<std::uint8_t*>(std::malloc(stride * cinfo.output_height));
  if (*out == nullptr) {
    std::strncpy(message, "out of memory", JMSG_LENGTH_MAX);
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = *out + stride * cinfo.output_scanline;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  // libjpeg only warns on premature EOF; treat it as a hard failure.
  const bool truncated = jerr.pub.num_warnings > 0;
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  if (truncated) {
    std::strncpy(message, "truncated JPEG data", JMSG_LENGTH_MAX);
    std::free(*out);
    *out = nullptr;
    return false;
  }
  return true;
}

Image decode_jpeg(std::span<const std::uint8_t> bytes) {
  std::uint8_t* raw = nullptr;
  unsigned w = 0;
  unsigned h = 0;
  char message[JMSG_LENGTH_MAX] = {};
  if (!jpeg_decode_raw(bytes.data(), bytes.size(), &raw, &w, &h, message)) unreadable(message);
  std::vector<std::uint8_t> data(raw, raw + static_cast<std::size_t>(w) * h * 3);
  std::free(raw);
  return make_checked(w, h, std::move(data));
}

}  // namespace

Image decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) unreadable("file too short");
  static constexpr std::uint8_t png_sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  if (bytes.size() >= 8 && std::equal(std::begin(png_sig), std::end(png_sig), bytes.begin())) {
    return decode_png(bytes);
  }
  if (bytes[0] == 0xFF && bytes[1] == 0xD8) return decode_jpeg(bytes);
  if (bytes[0] == 'B' && bytes[1] == 'M') return decode_bmp(bytes);
  if (bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) return decode_ppm(bytes);
  throw IoError("unsupported image format");
}

Image load_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_image(bytes);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_png(const Image& img) {
  if (img.empty()) throw std::invalid_argument("cannot encode an empty image");
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width());
  png.height = static_cast<png_uint_32>(img.height());
  png.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(png, size, 0, img.data().data(), 0, nullptr)) {
    throw IoError(std::string("PNG encode failed: ") + png.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&png, out.data(), &size, 0, img.data().data(), 0, nullptr)) {
    throw IoError(std::string("PNG encode failed: ") + png.message);
  }
  out.resize(size);
  return out;
}

void save_png(const Image& img, const std::filesystem::path& path) { write_file(path, encode_png(img)); }

std::vector<std::uint8_t> encode_ppm(const Image& img) {
  const std::string header = "P6\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.data().begin(), img.data().end());
  return out;
}

void save_ppm(const Image& img, const std::filesystem::path& path) { write_file(path, encode_ppm(img)); }

Image crop(const Image& img, int x, int y, int w, int h) {
  if (x < 0 || y < 0 || w < 1 || h < 1 || x + w > img.width() || y + h > img.height()) {
    throw std::invalid_argument("crop window outside image");
  }
  Image out(w, h);
  const std::size_t row = static_cast<std::size_t>(w) * Image::kChannels;
  for (int r = 0; r < h; ++r) {
    const auto src = img.pixels().subspan(
        (static_cast<std::size_t>(y + r) * static_cast<std::size_t>(img.width()) + static_cast<std::size_t>(x)) *
            Image::kChannels,
        row);
    std::copy(src.begin(), src.end(), out.pixels().begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(r) * row));
  }
  return out;
}

Image resize_bilinear(const Image& img, int width, int height) {
  if (img.empty()) throw std::invalid_argument("cannot resize an empty image");
  if (width == img.width() && height == img.height()) return img;
  Image out(width, height);
  const double sx = static_cast<double>(img.width()) / width;
  const double sy = static_cast<double>(img.height()) / height;

  struct Tap {
    int i0, i1;
    double w1;
  };
  auto taps = [](int n_out, int n_in, double scale) {
    std::vector<Tap> t(static_cast<std::size_t>(n_out));
    for (int i = 0; i < n_out; ++i) {
      const double src = std::clamp((i + 0.5) * scale - 0.5, 0.0, static_cast<double>(n_in - 1));
      const int i0 = static_cast<int>(std::floor(src));
      const int i1 = std::min(i0 + 1, n_in - 1);
      t[static_cast<std::size_t>(i)] = {i0, i1, src - i0};
    }
    return t;
  };
  const auto tx = taps(width, img.width(), sx);
  const auto ty = taps(height, img.height(), sy);

  for (int y = 0; y < height; ++y) {
    const Tap& v = ty[static_cast<std::size_t>(y)];
    for (int x = 0; x < width; ++x) {
      const Tap& u = tx[static_cast<std::size_t>(x)];
      for (int c = 0; c < Image::kChannels; ++c) {
        const double top = img(u.i0, v.i0, c) * (1.0 - u.w1) + img(u.i1, v.i0, c) * u.w1;
        const double bottom = img(u.i0, v.i1, c) * (1.0 - u.w1) + img(u.i1, v.i1, c) * u.w1;
        out(x, y, c) = to_u8(top * (1.0 - v.w1) + bottom * v.w1);
      }
    }
  }
  return out;
}

}  // namespace semfilter
