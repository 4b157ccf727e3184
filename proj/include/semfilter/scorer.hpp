#pragma once

#include <stdexcept>

#include <Eigen/Core>

#include "semfilter/tiler.hpp"

namespace semfilter {

/// Softmax over `logits` rescaled by the element count, so the result sums to k
/// and equal logits map to all ones. Max-subtracted for stability.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> count_scaled_softmax(
    const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (logits.size() == 0) throw std::invalid_argument("softmax of an empty vector");
  const Vector shifted = logits.derived().array() - logits.maxCoeff();
  const Vector e = shifted.array().exp();
  return e * (static_cast<Scalar>(logits.size()) / e.sum());
}

/// Relevance of each tile to the text: softmax(logit_scale * cos) * k.
/// `text` is a unit vector of dimension d; `tiles` is d x k with unit columns.
Eigen::VectorXd score_tiles(const Eigen::VectorXf& text, const Eigen::MatrixXf& tiles, double logit_scale);

/// Per-cell scores on the stride x stride lattice; scores(cy, cx).
struct ScoreGrid {
  int stride = 0;
  Eigen::MatrixXd scores;

  int cells_x() const noexcept { return static_cast<int>(scores.cols()); }
  int cells_y() const noexcept { return static_cast<int>(scores.rows()); }
};

/// Each cell gets the mean score of every tile whose footprint covers it.
ScoreGrid aggregate(const TileGrid& grid, const Eigen::VectorXd& tile_scores);

/// All cells 1.0.
ScoreGrid uniform_scores(const TileGrid& grid);

}  // namespace semfilter
