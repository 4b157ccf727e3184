#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "semfilter/embedder.hpp"

namespace semfilter {
namespace {

constexpr int kPoolGrid = 8;
constexpr int kGradGrid = 8;
constexpr double kGradWeight = 4.0;  // detail loss must move the embedding as much as colour shifts
constexpr int kFeatures = kPoolGrid * kPoolGrid * Image::kChannels + kGradGrid * kGradGrid + 1;
constexpr std::uint64_t kProjectionSeed = 0x5eedf11e7e5ull;

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Box-Muller on splitmix64 output; portable, unlike std::normal_distribution.
Eigen::VectorXf gaussian_vector(int n, std::uint64_t seed) {
  Eigen::VectorXf v(n);
  std::uint64_t state = seed;
  for (int i = 0; i < n; i += 2) {
    const double u1 = (static_cast<double>(splitmix64(state) >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    v(i) = static_cast<float>(r * std::cos(2.0 * std::numbers::pi * u2));
    if (i + 1 < n) v(i + 1) = static_cast<float>(r * std::sin(2.0 * std::numbers::pi * u2));
  }
  return v;
}

std::vector<std::string> words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

// Mean over the pixels of cell (i, j) of a g x g partition; rounding spreads leftovers evenly.
struct CellRange {
  int x0, x1, y0, y1;
};

CellRange cell(const Image& img, int g, int i, int j) {
  return {i * img.width() / g, (i + 1) * img.width() / g, j * img.height() / g, (j + 1) * img.height() / g};
}

Eigen::VectorXf features(const Image& img) {
  Eigen::VectorXf f = Eigen::VectorXf::Zero(kFeatures);
  int k = 0;
  for (int j = 0; j < kPoolGrid; ++j) {
    for (int i = 0; i < kPoolGrid; ++i) {
      const CellRange r = cell(img, kPoolGrid, i, j);
      const double n = std::max(1, (r.x1 - r.x0) * (r.y1 - r.y0));
      for (int c = 0; c < Image::kChannels; ++c) {
        double acc = 0.0;
        for (int y = r.y0; y < r.y1; ++y) {
          for (int x = r.x0; x < r.x1; ++x) acc += img(x, y, c);
        }
        f(k++) = static_cast<float>(acc / (255.0 * n) - 0.5);
      }
    }
  }
  for (int j = 0; j < kGradGrid; ++j) {
    for (int i = 0; i < kGradGrid; ++i) {
      const CellRange r = cell(img, kGradGrid, i, j);
      double acc = 0.0;
      int n = 0;
      for (int y = r.y0; y < r.y1; ++y) {
        for (int x = r.x0; x < r.x1; ++x) {
          for (int c = 0; c < Image::kChannels; ++c) {
            if (x + 1 < img.width()) acc += std::abs(img(x + 1, y, c) - img(x, y, c));
            if (y + 1 < img.height()) acc += std::abs(img(x, y + 1, c) - img(x, y, c));
          }
          ++n;
        }
      }
      f(k++) = static_cast<float>(kGradWeight * acc / (255.0 * std::max(1, n)));
    }
  }
  f(k) = 0.05f;  // keeps flat mid-grey images away from the zero vector
  return f;
}

}  // namespace

StubBackend::StubBackend(int dim, std::size_t context_window, SimilarityFn similarity)
    : dim_(dim), context_window_(context_window), similarity_(std::move(similarity)) {
  if (dim < 2) throw std::invalid_argument("stub backend: dim must be >= 2");
  if (context_window < 2) throw std::invalid_argument("stub backend: context window must be >= 2");
  projection_.resize(dim_, kFeatures);
  for (int j = 0; j < kFeatures; ++j) projection_.col(j) = gaussian_vector(dim_, kProjectionSeed + static_cast<std::uint64_t>(j));
}

std::size_t StubBackend::count_tokens(std::string_view text) const { return words(text).size() + 2; }

Eigen::VectorXf StubBackend::embed_text(std::string_view text) const {
  if (similarity_) return Eigen::VectorXf::Unit(dim_, 0);
  auto ws = words(text);
  if (ws.size() + 2 > context_window_) ws.resize(context_window_ - 2);
  if (ws.empty()) return gaussian_vector(dim_, fnv1a("<empty>"));
  Eigen::VectorXf v = Eigen::VectorXf::Zero(dim_);
  for (const auto& w : ws) v += gaussian_vector(dim_, fnv1a(w));
  if (v.norm() == 0.0f) v(0) = 1.0f;
  return v;
}

Eigen::VectorXf StubBackend::content_embedding(const Image& img) const { return projection_ * features(img); }

Eigen::MatrixXf StubBackend::embed_images(std::span<const Image> images) const {
  Eigen::MatrixXf out(dim_, static_cast<Eigen::Index>(images.size()));
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].empty()) throw std::invalid_argument("stub backend: empty image");
    Eigen::VectorXf v = content_embedding(images[i]);
    if (similarity_) {
      const double c = std::clamp(similarity_(images[i]), -1.0, 1.0);
      v(0) = 0.0f;
      if (!(v.norm() > 0.0f)) v = Eigen::VectorXf::Unit(dim_, 1);
      v.normalize();
      v = static_cast<float>(std::sqrt(1.0 - c * c)) * v;
      v(0) = static_cast<float>(c);
    }
    out.col(static_cast<Eigen::Index>(i)) = v;
  }
  return out;
}

}  // namespace semfilter
