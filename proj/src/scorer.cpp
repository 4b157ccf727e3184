#include "semfilter/scorer.hpp"

#include <algorithm>
#include <string>

namespace semfilter {

Eigen::VectorXd score_tiles(const Eigen::VectorXf& text, const Eigen::MatrixXf& tiles, double logit_scale) {
  if (tiles.cols() == 0) throw std::invalid_argument("score_tiles: no tiles");
  if (tiles.rows() != text.size()) {
    throw std::invalid_argument("score_tiles: text dim " + std::to_string(text.size()) + " != tile dim " +
                                std::to_string(tiles.rows()));
  }
  const Eigen::VectorXd cosines = tiles.cast<double>().transpose() * text.cast<double>();
  return count_scaled_softmax(logit_scale * cosines);
}

ScoreGrid aggregate(const TileGrid& grid, const Eigen::VectorXd& tile_scores) {
  if (static_cast<std::size_t>(tile_scores.size()) != grid.count()) {
    throw std::invalid_argument("aggregate: " + std::to_string(tile_scores.size()) + " scores for " +
                                std::to_string(grid.count()) + " tiles");
  }
  // Row-major origins: tile (tx, ty) sits at index ty * tiles_x + tx.
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> per_tile(
      tile_scores.data(), grid.tiles_y, grid.tiles_x);
  const int span = grid.cells_per_tile();

  ScoreGrid out{grid.stride, Eigen::MatrixXd(grid.cells_y(), grid.cells_x())};
  for (int cy = 0; cy < grid.cells_y(); ++cy) {
    const int ty0 = std::max(0, cy - span + 1);
    const int ty1 = std::min(grid.tiles_y - 1, cy);
    for (int cx = 0; cx < grid.cells_x(); ++cx) {
      const int tx0 = std::max(0, cx - span + 1);
      const int tx1 = std::min(grid.tiles_x - 1, cx);
      out.scores(cy, cx) = per_tile.block(ty0, tx0, ty1 - ty0 + 1, tx1 - tx0 + 1).mean();
    }
  }
  return out;
}

ScoreGrid uniform_scores(const TileGrid& grid) {
  return {grid.stride, Eigen::MatrixXd::Ones(grid.cells_y(), grid.cells_x())};
}

}  // namespace semfilter
