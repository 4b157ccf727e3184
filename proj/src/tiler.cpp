#include "semfilter/tiler.hpp"

#include <array>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace semfilter {

namespace {
int round_up(int v, int multiple) { return ((v + multiple - 1) / multiple) * multiple; }
}  // namespace

Image resize_to_tile_multiple(const Image& img, int tile_size) {
  if (img.empty()) throw std::invalid_argument("resize_to_tile_multiple: empty image");
  if (tile_size < 1) throw std::invalid_argument("resize_to_tile_multiple: tile_size must be >= 1");
  return resize_bilinear(img, round_up(img.width(), tile_size), round_up(img.height(), tile_size));
}

int tiles_along(int dim, int tile_size, int stride) {
  if (dim < tile_size || (dim - tile_size) % stride != 0) {
    throw std::invalid_argument("dimension " + std::to_string(dim) + " is not on the stride-" +
                                std::to_string(stride) + " lattice for tile " + std::to_string(tile_size));
  }
  return (dim - tile_size) / stride + 1;
}

int select_stride(int resized_width, int resized_height, int tile_size, int tile_num, bool allow_overlap) {
  if (tile_size < 4 || tile_size % 4 != 0) throw std::invalid_argument("tile_size must be a multiple of 4");
  if (resized_width % tile_size != 0 || resized_height % tile_size != 0) {
    throw std::invalid_argument("dimensions must be multiples of tile_size");
  }
  if (!allow_overlap) return tile_size;

  // Candidates in decreasing stride order so a strict '<' keeps the larger stride on ties.
  const std::array<int, 3> candidates = {tile_size, tile_size / 2, tile_size / 4};
  int best = tile_size;
  long long best_gap = -1;
  for (int stride : candidates) {
    const long long k = static_cast<long long>(tiles_along(resized_width, tile_size, stride)) *
                        tiles_along(resized_height, tile_size, stride);
    const long long gap = std::llabs(k - tile_num);
    if (best_gap < 0 || gap < best_gap) {
      best = stride;
      best_gap = gap;
    }
  }
  return best;
}

TileGrid make_grid(int resized_width, int resized_height, int tile_size, int stride) {
  if (stride < 1 || tile_size % stride != 0) throw std::invalid_argument("stride must divide tile_size");
  TileGrid grid;
  grid.resized_width = resized_width;
  grid.resized_height = resized_height;
  grid.tile_size = tile_size;
  grid.stride = stride;
  grid.tiles_x = tiles_along(resized_width, tile_size, stride);
  grid.tiles_y = tiles_along(resized_height, tile_size, stride);
  grid.origins.reserve(static_cast<std::size_t>(grid.tiles_x) * static_cast<std::size_t>(grid.tiles_y));
  for (int ty = 0; ty < grid.tiles_y; ++ty) {
    for (int tx = 0; tx < grid.tiles_x; ++tx) grid.origins.push_back({tx * stride, ty * stride});
  }
  return grid;
}

std::vector<Image> extract_tiles(const Image& img, const TileGrid& grid) {
  if (img.width() != grid.resized_width || img.height() != grid.resized_height) {
    throw std::invalid_argument("extract_tiles: image is " + std::to_string(img.width()) + "x" +
                                std::to_string(img.height()) + " but grid expects " +
                                std::to_string(grid.resized_width) + "x" + std::to_string(grid.resized_height));
  }
  std::vector<Image> tiles;
  tiles.reserve(grid.count());
  for (const auto& o : grid.origins) tiles.push_back(crop(img, o.x, o.y, grid.tile_size, grid.tile_size));
  return tiles;
}

}  // namespace semfilter
