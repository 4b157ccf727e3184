#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace semfilter {

/// 8-bit RGB raster, row-major with interleaved channels (R, G, B per pixel).
class Image {
public:
  static constexpr int kChannels = 3;

  Image() = default;
  /// Zero-filled image. Throws std::invalid_argument on non-positive dimensions.
  Image(int width, int height);
  /// Takes ownership of `data`, which must hold exactly width * height * 3 samples.
  Image(int width, int height, std::vector<std::uint8_t> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  std::span<const std::uint8_t> pixels() const noexcept { return data_; }
  std::span<std::uint8_t> pixels() noexcept { return data_; }
  const std::vector<std::uint8_t>& data() const noexcept { return data_; }

  std::uint8_t operator()(int x, int y, int c) const noexcept { return data_[index(x, y, c)]; }
  std::uint8_t& operator()(int x, int y, int c) noexcept { return data_[index(x, y, c)]; }

  friend bool operator==(const Image&, const Image&) = default;

private:
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) *
               kChannels +
           static_cast<std::size_t>(c);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Decodes PNG, PPM (P5/P6), BMP or JPEG. Grayscale is replicated to three channels.
/// Throws IoError("unreadable ...") on truncated or corrupt data and on unknown formats.
Image decode_image(std::span<const std::uint8_t> bytes);
Image load_image(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const Image& img);
void save_png(const Image& img, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_ppm(const Image& img);
void save_ppm(const Image& img, const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// Copies the w x h window whose top-left corner is (x, y). The window must lie inside `img`.
Image crop(const Image& img, int x, int y, int w, int h);

/// Bilinear resampling with half-pixel centres; the identity when the size is unchanged.
Image resize_bilinear(const Image& img, int width, int height);

/// Rounds to nearest and clamps into [0, 255].
std::uint8_t to_u8(double v) noexcept;

}  // namespace semfilter
