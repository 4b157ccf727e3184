#pragma once

// Shared fixtures and independent reference implementations for the unit and
// acceptance tests. Nothing here calls into the library code it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "semfilter/image.hpp"

namespace semfilter::testing {

inline std::filesystem::path data_dir() { return SEMFILTER_TEST_DATA; }

inline nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing fixture " + path.string());
  return nlohmann::json::parse(in);
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing fixture " + path.string());
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line[0] != '#') out.push_back(line);
  }
  return out;
}

inline Image noise_image(int w, int h, std::mt19937& rng) {
  std::uniform_int_distribution<int> byte(0, 255);
  Image img(w, h);
  for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(byte(rng));
  return img;
}

inline std::uint8_t clamp_u8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

// Oriented stripes with a checker overlay and mild grain.
inline Image texture_image(int w, int h, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> grain(0.0, 12.0);
  const double fx = 0.2 + 0.5 * u(rng), fy = 0.1 + 0.4 * u(rng), cell = 6 + 10 * u(rng);
  Image img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double stripe = 0.5 + 0.5 * std::sin(fx * x + fy * y);
      const bool check = (static_cast<int>(x / cell) + static_cast<int>(y / cell)) % 2 == 0;
      for (int c = 0; c < 3; ++c) {
        img(x, y, c) = clamp_u8(60 + 120 * stripe + (check ? 50 : -20) + 15 * c + grain(rng));
      }
    }
  }
  return img;
}

// Photo-like content: smooth sky/ground gradients, a few soft-edged blobs and sensor noise.
inline Image natural_image(int w, int h, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 4.0);
  struct Blob {
    double x, y, r, col[3];
  };
  std::vector<Blob> blobs(5);
  for (auto& b : blobs) b = {u(rng) * w, u(rng) * h, (0.05 + 0.15 * u(rng)) * w, {255 * u(rng), 255 * u(rng), 255 * u(rng)}};
  const double horizon = (0.3 + 0.4 * u(rng)) * h;
  Image img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double px[3];
      const double t = y / static_cast<double>(h);
      if (y < horizon) {
        px[0] = 110 + 60 * t, px[1] = 150 + 50 * t, px[2] = 220 - 20 * t;
      } else {
        px[0] = 90 + 40 * t + 10 * std::sin(x * 0.05), px[1] = 120 + 30 * t, px[2] = 60 + 20 * t;
      }
      for (const auto& b : blobs) {
        const double d = std::hypot(x - b.x, y - b.y);
        const double a = 1.0 / (1.0 + std::exp((d - b.r) / 2.0));
        for (int c = 0; c < 3; ++c) px[c] = (1 - a) * px[c] + a * b.col[c];
      }
      for (int c = 0; c < 3; ++c) img(x, y, c) = clamp_u8(px[c] + noise(rng));
    }
  }
  return img;
}

inline int reflect101(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) i = i < 0 ? -i : 2 * (n - 1) - i;
  return i;
}

// Direct 2-D convolution with the outer-product Gaussian and reflect-101 padding.
inline Image brute_force_blur(const Image& img, double sigma, int size) {
  const int r = size / 2;
  std::vector<double> w1(static_cast<std::size_t>(size));
  double total = 0.0;
  for (int i = 0; i < size; ++i) total += w1[static_cast<std::size_t>(i)] = std::exp(-(i - r) * (i - r) / (2 * sigma * sigma));
  for (auto& v : w1) v /= total;
  Image out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int dy = -r; dy <= r; ++dy) {
          for (int dx = -r; dx <= r; ++dx) {
            acc += w1[static_cast<std::size_t>(dy + r)] * w1[static_cast<std::size_t>(dx + r)] *
                   img(reflect101(x + dx, img.width()), reflect101(y + dy, img.height()), c);
          }
        }
        out(x, y, c) = clamp_u8(acc);
      }
    }
  }
  return out;
}

inline int max_abs_diff(const Image& a, const Image& b) {
  int worst = 0;
  for (std::size_t i = 0; i < a.pixels().size(); ++i) worst = std::max(worst, std::abs(a.pixels()[i] - b.pixels()[i]));
  return worst;
}

// Reference monotone cubic written from the textbook formulas, evaluated point-wise.
class ReferencePchip {
public:
  ReferencePchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      h[k] = x_[k + 1] - x_[k];
      delta[k] = (y_[k + 1] - y_[k]) / h[k];
    }
    d_.assign(n, 0.0);
    if (n == 2) {
      d_[0] = d_[1] = delta[0];
      return;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
      if (delta[k - 1] * delta[k] > 0) {
        const double w1 = 2 * h[k] + h[k - 1], w2 = h[k] + 2 * h[k - 1];
        d_[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
      }
    }
    auto edge = [](double h0, double h1, double m0, double m1) {
      double d = ((2 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
      if (d * m0 <= 0) return 0.0;
      if (m0 * m1 < 0 && std::abs(d) > 3 * std::abs(m0)) return 3 * m0;
      return d;
    };
    d_[0] = edge(h[0], h[1], delta[0], delta[1]);
    d_[n - 1] = edge(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  }

  double operator()(double t) const {
    std::size_t k = 0;
    while (k + 2 < x_.size() && t > x_[k + 1]) ++k;
    const double h = x_[k + 1] - x_[k], s = (t - x_[k]) / h;
    const double h00 = 2 * s * s * s - 3 * s * s + 1, h10 = s * s * s - 2 * s * s + s;
    const double h01 = -2 * s * s * s + 3 * s * s, h11 = s * s * s - s * s;
    return h00 * y_[k] + h10 * h * d_[k] + h01 * y_[k + 1] + h11 * h * d_[k + 1];
  }

  // Composite trapezoid on n equal panels.
  double dense_integral(double a, double b, int n = 200000) const {
    const double step = (b - a) / n;
    double acc = 0.5 * ((*this)(a) + (*this)(b));
    for (int i = 1; i < n; ++i) acc += (*this)(a + i * step);
    return acc * step;
  }

private:
  std::vector<double> x_, y_, d_;
};

}  // namespace semfilter::testing
