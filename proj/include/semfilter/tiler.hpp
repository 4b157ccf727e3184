#pragma once

#include <cstddef>
#include <vector>

#include "semfilter/image.hpp"

namespace semfilter {

struct TileOrigin {
  int x = 0;
  int y = 0;
  friend bool operator==(const TileOrigin&, const TileOrigin&) = default;
};

/// Sliding-window lattice over a tile-multiple canvas. Origins are row-major.
struct TileGrid {
  int resized_width = 0;
  int resized_height = 0;
  int tile_size = 0;
  int stride = 0;
  int tiles_x = 0;
  int tiles_y = 0;
  std::vector<TileOrigin> origins;

  std::size_t count() const noexcept { return origins.size(); }
  /// The stride x stride lattice shared by scores and sigmas.
  int cells_x() const noexcept { return resized_width / stride; }
  int cells_y() const noexcept { return resized_height / stride; }
  int cells_per_tile() const noexcept { return tile_size / stride; }
};

/// Rounds each axis up to the next multiple of tile_size (bilinear resample).
Image resize_to_tile_multiple(const Image& img, int tile_size);

/// Number of window positions along one axis.
int tiles_along(int dim, int tile_size, int stride);

/// Picks the stride in {tile_size, tile_size/2, tile_size/4} whose tile count is
/// closest to tile_num; ties go to the larger stride.
int select_stride(int resized_width, int resized_height, int tile_size, int tile_num, bool allow_overlap);

TileGrid make_grid(int resized_width, int resized_height, int tile_size, int stride);

std::vector<Image> extract_tiles(const Image& img, const TileGrid& grid);

}  // namespace semfilter
