#pragma once

#include <cmath>

#include <Eigen/Core>

#include "semfilter/image.hpp"
#include "semfilter/scorer.hpp"

namespace semfilter {

/// Exponential score-to-sigma map: sigma_one at score 1, sigma_max at score 0,
/// decaying towards zero for scores above 1. Written as a weighted geometric mean
/// so both endpoints are reproduced exactly.
template <typename Scalar>
Scalar sigma_for_score(Scalar score, Scalar sigma_one, Scalar sigma_max) {
  using std::pow;
  return pow(sigma_one, score) * pow(sigma_max, Scalar(1) - score);
}

struct SigmaGrid {
  int stride = 0;
  Eigen::MatrixXd sigmas;  // (cy, cx), same lattice as ScoreGrid

  int cells_x() const noexcept { return static_cast<int>(sigmas.cols()); }
  int cells_y() const noexcept { return static_cast<int>(sigmas.rows()); }
};

/// Throws std::invalid_argument unless 0 < sigma_one < sigma_max.
SigmaGrid sigma_map(const ScoreGrid& scores, double sigma_one, double sigma_max);

/// Below this sigma the kernel collapses to a unit impulse.
inline constexpr double kDeltaSigma = 1e-3;

/// Normalized, symmetric 1-D Gaussian taps.
struct GaussianKernel {
  Eigen::VectorXd weights;

  int size() const noexcept { return static_cast<int>(weights.size()); }
  int radius() const noexcept { return (size() - 1) / 2; }
  bool is_delta() const noexcept { return weights(radius()) == 1.0; }
};

GaussianKernel make_kernel(double sigma, int size);

/// Mirror index about the edge sample without repeating it (… 2 1 | 0 1 2 … n-1 | n-2 …).
int reflect_index(int i, int n) noexcept;

/// Smooths each stride x stride block with its own sigma. Blocks are padded by
/// reflecting their own content and filtered rows-then-columns per channel.
Image filter_blocks(const Image& img, const SigmaGrid& sigmas, int kernel_size);

/// Whole-image separable Gaussian with reflection at the image border.
Image gaussian_blur(const Image& img, double sigma, int kernel_size);

}  // namespace semfilter
