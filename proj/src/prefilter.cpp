#include "semfilter/prefilter.hpp"

#include <stdexcept>
#include <string>
#include <vector>

#include "parallel.hpp"

namespace semfilter {

SigmaGrid sigma_map(const ScoreGrid& scores, double sigma_one, double sigma_max) {
  if (!(sigma_one > 0.0) || !(sigma_one < sigma_max)) {
    throw std::invalid_argument("sigma_map: need 0 < sigma_one < sigma_max");
  }
  return {scores.stride,
          scores.scores.unaryExpr([&](double s) { return sigma_for_score(s, sigma_one, sigma_max); })};
}

GaussianKernel make_kernel(double sigma, int size) {
  if (size < 3 || size % 2 == 0) throw std::invalid_argument("kernel size must be odd and >= 3");
  if (!(sigma >= 0.0)) throw std::invalid_argument("kernel sigma must be >= 0");
  const int c = (size - 1) / 2;
  GaussianKernel k{Eigen::VectorXd::Zero(size)};
  if (sigma < kDeltaSigma) {
    k.weights(c) = 1.0;
    return k;
  }
  for (int i = 0; i < size; ++i) {
    const double d = i - c;
    k.weights(i) = std::exp(-(d * d) / (2.0 * sigma * sigma));
  }
  k.weights /= k.weights.sum();
  // Force exact symmetry; the division above can differ by an ulp between mirrored taps.
  for (int i = 0; i < c; ++i) k.weights(size - 1 - i) = k.weights(i);
  return k;
}

int reflect_index(int i, int n) noexcept {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i >= n ? period - i : i;
}

namespace {

// Filters the w x h window at (x0, y0) of `src` into the same window of `dst`,
// padding by reflecting the window's own content.
void filter_window(const Image& src, Image& dst, int x0, int y0, int w, int h, const GaussianKernel& kernel) {
  if (kernel.is_delta()) {
    for (int y = y0; y < y0 + h; ++y) {
      for (int x = x0; x < x0 + w; ++x) {
        for (int c = 0; c < Image::kChannels; ++c) dst(x, y, c) = src(x, y, c);
      }
    }
    return;
  }
  const int r = kernel.radius();
  const int size = kernel.size();
  const double* taps = kernel.weights.data();

  std::vector<int> col_at(static_cast<std::size_t>(w + 2 * r));
  std::vector<int> row_at(static_cast<std::size_t>(h + 2 * r));
  for (int i = 0; i < w + 2 * r; ++i) col_at[static_cast<std::size_t>(i)] = x0 + reflect_index(i - r, w);
  for (int i = 0; i < h + 2 * r; ++i) row_at[static_cast<std::size_t>(i)] = y0 + reflect_index(i - r, h);

  // Horizontal pass over every padded row, then vertical pass.
  std::vector<double> horiz(static_cast<std::size_t>(h + 2 * r) * static_cast<std::size_t>(w));
  for (int c = 0; c < Image::kChannels; ++c) {
    for (int py = 0; py < h + 2 * r; ++py) {
      const int sy = row_at[static_cast<std::size_t>(py)];
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int k = 0; k < size; ++k) acc += taps[k] * src(col_at[static_cast<std::size_t>(x + k)], sy, c);
        horiz[static_cast<std::size_t>(py) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] = acc;
      }
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int k = 0; k < size; ++k) {
          acc += taps[k] * horiz[static_cast<std::size_t>(y + k) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)];
        }
        dst(x0 + x, y0 + y, c) = to_u8(acc);
      }
    }
  }
}

}  // namespace

Image filter_blocks(const Image& img, const SigmaGrid& sigmas, int kernel_size) {
  const int stride = sigmas.stride;
  if (stride < 1 || img.width() != sigmas.cells_x() * stride || img.height() != sigmas.cells_y() * stride) {
    throw std::invalid_argument("filter_blocks: image " + std::to_string(img.width()) + "x" +
                                std::to_string(img.height()) + " does not match a " +
                                std::to_string(sigmas.cells_x()) + "x" + std::to_string(sigmas.cells_y()) +
                                " lattice of stride " + std::to_string(stride));
  }
  if (kernel_size < 3 || kernel_size % 2 == 0) throw std::invalid_argument("kernel size must be odd and >= 3");
  if (stride < (kernel_size - 1) / 2 + 1) {
    throw std::invalid_argument("filter_blocks: stride " + std::to_string(stride) +
                                " too small for per-block reflection with kernel " + std::to_string(kernel_size));
  }

  Image out(img.width(), img.height());
  // Blocks write disjoint regions of `out`.
  detail::parallel_for(sigmas.cells_y(), [&](int cy) {
    for (int cx = 0; cx < sigmas.cells_x(); ++cx) {
      const GaussianKernel kernel = make_kernel(sigmas.sigmas(cy, cx), kernel_size);
      filter_window(img, out, cx * stride, cy * stride, stride, stride, kernel);
    }
  });
  return out;
}

Image gaussian_blur(const Image& img, double sigma, int kernel_size) {
  if (img.empty()) throw std::invalid_argument("gaussian_blur: empty image");
  Image out(img.width(), img.height());
  filter_window(img, out, 0, 0, img.width(), img.height(), make_kernel(sigma, kernel_size));
  return out;
}

}  // namespace semfilter
