#include <doctest.h>

#include <random>

#include "semfilter/prefilter.hpp"
#include "support.hpp"

using namespace semfilter;

TEST_CASE("sigma map matches oracle values") {
  const auto oracles = testing::read_json(testing::data_dir() / "oracles.json");
  for (const auto& c : oracles["sigma"]) {
    const double s = std::stod(c["score"].get<std::string>());
    CHECK(sigma_for_score(s, 0.2, 3.0) == doctest::Approx(c["sigma"].get<double>()).epsilon(1e-14));
  }
  CHECK(sigma_for_score(0.0, 0.2, 3.0) == 3.0);
  CHECK(sigma_for_score(1.0, 0.2, 3.0) == 0.2);

  ScoreGrid sg{4, Eigen::MatrixXd::Zero(1, 2)};
  sg.scores(0, 1) = 1.0;
  const SigmaGrid sig = sigma_map(sg, 0.2, 3.0);
  CHECK(sig.sigmas(0, 0) == 3.0);
  CHECK(sig.sigmas(0, 1) == 0.2);
  CHECK_THROWS_AS(sigma_map(sg, 3.0, 0.2), std::invalid_argument);
}

TEST_CASE("kernels match oracle weights") {
  const auto oracles = testing::read_json(testing::data_dir() / "oracles.json");
  for (const auto& c : oracles["kernels"]) {
    const auto want = c["weights"].get<std::vector<double>>();
    const GaussianKernel k = make_kernel(c["sigma"], c["size"]);
    REQUIRE(k.size() == 11);
    for (int i = 0; i < 11; ++i) CHECK(k.weights(i) == doctest::Approx(want[static_cast<std::size_t>(i)]).epsilon(1e-14));
    CHECK(k.weights.sum() == doctest::Approx(1.0).epsilon(1e-15));
  }
  CHECK(make_kernel(0.0005, 11).is_delta());
  CHECK_FALSE(make_kernel(0.2, 11).is_delta());
  CHECK_THROWS_AS(make_kernel(1.0, 4), std::invalid_argument);
}

TEST_CASE("reflect index mirrors without repeating the edge") {
  CHECK(reflect_index(-1, 5) == 1);
  CHECK(reflect_index(-2, 5) == 2);
  CHECK(reflect_index(5, 5) == 3);
  CHECK(reflect_index(6, 5) == 2);
  CHECK(reflect_index(3, 5) == 3);
  CHECK(reflect_index(-7, 5) == 1);
  CHECK(reflect_index(4, 1) == 0);
}

TEST_CASE("per-block filtering equals filtering each block on its own") {
  std::mt19937 rng(7);
  const Image img = testing::noise_image(64, 32, rng);
  SigmaGrid sg{32, Eigen::MatrixXd(1, 2)};
  sg.sigmas << 0.0, 2.0;
  const Image out = filter_blocks(img, sg, 11);
  CHECK(crop(out, 0, 0, 32, 32) == crop(img, 0, 0, 32, 32));
  CHECK(crop(out, 32, 0, 32, 32) == gaussian_blur(crop(img, 32, 0, 32, 32), 2.0, 11));
  CHECK(testing::max_abs_diff(crop(out, 32, 0, 32, 32), testing::brute_force_blur(crop(img, 32, 0, 32, 32), 2.0, 11)) <= 1);
}

TEST_CASE("blur keeps flat images flat and rejects bad lattices") {
  Image flat(40, 40);
  for (auto& v : flat.pixels()) v = 77;
  CHECK(gaussian_blur(flat, 3.0, 11) == flat);
  SigmaGrid sg{20, Eigen::MatrixXd::Constant(2, 2, 1.5)};
  CHECK(filter_blocks(flat, sg, 11) == flat);
  SigmaGrid wrong{16, Eigen::MatrixXd::Ones(2, 2)};
  CHECK_THROWS_AS(filter_blocks(flat, wrong, 11), std::invalid_argument);
  SigmaGrid tiny{4, Eigen::MatrixXd::Ones(10, 10)};
  CHECK_THROWS_AS(filter_blocks(flat, tiny, 11), std::invalid_argument);
}

TEST_CASE("whole-image blur matches the brute-force convolution") {
  std::mt19937 rng(8);
  const Image img = testing::natural_image(48, 40, rng);
  for (double sigma : {0.6, 1.0, 3.0}) {
    CHECK(testing::max_abs_diff(gaussian_blur(img, sigma, 11), testing::brute_force_blur(img, sigma, 11)) <= 1);
  }
}

namespace {

double block_mean(const Image& img, int c) {
  double acc = 0.0;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) acc += img(x, y, c);
  }
  return acc / (img.width() * img.height());
}

double total_variation(const Image& img) {
  double tv = 0.0;
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) {
        if (x + 1 < img.width()) tv += std::abs(img(x + 1, y, c) - img(x, y, c));
        if (y + 1 < img.height()) tv += std::abs(img(x, y + 1, c) - img(x, y, c));
      }
    }
  }
  return tv;
}

double laplacian_energy(const Image& img) {
  double e = 0.0;
  for (int c = 0; c < 3; ++c) {
    for (int y = 1; y + 1 < img.height(); ++y) {
      for (int x = 1; x + 1 < img.width(); ++x) {
        const double l = 4.0 * img(x, y, c) - img(x - 1, y, c) - img(x + 1, y, c) - img(x, y - 1, c) - img(x, y + 1, c);
        e += l * l;
      }
    }
  }
  return e;
}

}  // namespace

TEST_CASE("filtered blocks keep their mean and lose variation") {
  std::mt19937 rng(9);
  const Image noise = testing::noise_image(224, 224, rng);
  const Image texture = testing::texture_image(224, 224, rng);
  const Image natural = testing::natural_image(224, 224, rng);
  for (const Image* img : {&noise, &texture, &natural}) {
    SigmaGrid sg{56, Eigen::MatrixXd(4, 4)};
    for (auto& v : sg.sigmas.reshaped()) v = std::uniform_real_distribution<double>(0.2, 3.0)(rng);
    const Image out = filter_blocks(*img, sg, 11);
    for (int by = 0; by < 4; ++by) {
      for (int bx = 0; bx < 4; ++bx) {
        const Image before = crop(*img, bx * 56, by * 56, 56, 56);
        const Image after = crop(out, bx * 56, by * 56, 56, 56);
        for (int c = 0; c < 3; ++c) CHECK(std::abs(block_mean(after, c) - block_mean(before, c)) <= 0.5);
        CHECK(total_variation(after) <= total_variation(before));
      }
    }
  }
}

TEST_CASE("a higher score leaves more high-frequency energy in its block") {
  std::mt19937 rng(10);
  const Image img = testing::texture_image(224, 224, rng);
  ScoreGrid low{112, Eigen::MatrixXd::Constant(2, 2, 0.5)};
  ScoreGrid high = low;
  for (double bump : {0.3, 1.0, 2.0}) {
    high.scores(1, 0) = low.scores(1, 0) + bump;
    const Image a = filter_blocks(img, sigma_map(high, 0.2, 3.0), 11);
    const Image b = filter_blocks(img, sigma_map(low, 0.2, 3.0), 11);
    CHECK(laplacian_energy(crop(a, 0, 112, 112, 112)) >= laplacian_energy(crop(b, 0, 112, 112, 112)));
    CHECK(crop(a, 112, 0, 112, 112) == crop(b, 112, 0, 112, 112));
  }
}
