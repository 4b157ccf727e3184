#include <doctest.h>

#include <random>

#include "semfilter/scorer.hpp"
#include "semfilter/tiler.hpp"
#include "support.hpp"

using namespace semfilter;

TEST_CASE("count-scaled softmax matches high-precision oracles") {
  const auto oracles = testing::read_json(testing::data_dir() / "oracles.json");
  for (const auto& c : oracles["softmax"]) {
    const auto cos = c["cos"].get<std::vector<double>>();
    const double scale = c["logit_scale"];
    const auto want = c["scores"].get<std::vector<double>>();
    Eigen::VectorXd logits = Eigen::Map<const Eigen::VectorXd>(cos.data(), static_cast<Eigen::Index>(cos.size()));
    const Eigen::VectorXd got = count_scaled_softmax(scale * logits);
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(got(static_cast<Eigen::Index>(i)) == doctest::Approx(want[i]).epsilon(1e-12));
  }
}

TEST_CASE("softmax is stable for large logits and works in float") {
  Eigen::VectorXd big(3);
  big << 1000.0, 1000.0, 1000.0;
  CHECK(count_scaled_softmax(big).isApprox(Eigen::VectorXd::Ones(3)));
  Eigen::VectorXf f(2);
  f << 0.0f, 0.0f;
  CHECK(count_scaled_softmax(f).sum() == doctest::Approx(2.0));
  CHECK_THROWS_AS(count_scaled_softmax(Eigen::VectorXd()), std::invalid_argument);
}

TEST_CASE("score_tiles uses cosine times logit scale") {
  Eigen::VectorXf text(2);
  text << 1.0f, 0.0f;
  Eigen::MatrixXf tiles(2, 3);
  tiles << 0.3f, 0.2f, 0.2f, std::sqrt(1 - 0.09f), std::sqrt(1 - 0.04f), -std::sqrt(1 - 0.04f);
  const Eigen::VectorXd s = score_tiles(text, tiles, 20.0);
  const auto oracles = testing::read_json(testing::data_dir() / "oracles.json");
  CHECK(s(0) == doctest::Approx(oracles["softmax"][0]["scores"][0].get<double>()).epsilon(1e-6));
  CHECK(s.sum() == doctest::Approx(3.0));
  CHECK_THROWS_AS(score_tiles(Eigen::VectorXf::Ones(3), tiles, 20.0), std::invalid_argument);
}

TEST_CASE("aggregation averages every covering tile") {
  // 3 x 2 tiles of size 2 with stride 1 on a 4 x 3 canvas.
  const TileGrid g = make_grid(4, 3, 2, 1);
  REQUIRE(g.count() == 6);
  Eigen::VectorXd s(6);
  s << 1, 2, 3, 4, 5, 6;  // row-major: tiles (0,0) (1,0) (2,0) / (0,1) (1,1) (2,1)
  const ScoreGrid cells = aggregate(g, s);
  REQUIRE(cells.cells_x() == 4);
  REQUIRE(cells.cells_y() == 3);
  CHECK(cells.scores(0, 0) == 1.0);
  CHECK(cells.scores(0, 1) == doctest::Approx(1.5));
  CHECK(cells.scores(1, 1) == doctest::Approx((1 + 2 + 4 + 5) / 4.0));
  CHECK(cells.scores(2, 3) == 6.0);
  CHECK(cells.scores(1, 3) == doctest::Approx(4.5));
  CHECK_THROWS_AS(aggregate(g, Eigen::VectorXd::Ones(5)), std::invalid_argument);
  CHECK(uniform_scores(g).scores.isOnes());
}

TEST_CASE("non-overlapping tiles map one-to-one onto cells") {
  const TileGrid g = make_grid(448, 224, 224, 224);
  Eigen::VectorXd s(2);
  s << 0.25, 1.75;
  const ScoreGrid cells = aggregate(g, s);
  CHECK(cells.scores(0, 0) == 0.25);
  CHECK(cells.scores(0, 1) == 1.75);
}

TEST_CASE("scores ignore a common logit offset and respond monotonically") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd logits(9);
  for (auto& v : logits) v = 3.0 * u(rng);
  const Eigen::VectorXd base = count_scaled_softmax(logits);
  CHECK(count_scaled_softmax((logits.array() + 37.5).matrix()).isApprox(base, 1e-12));
  CHECK(base.sum() == doctest::Approx(9.0).epsilon(1e-12));

  Eigen::VectorXd raised = logits;
  raised(4) += 0.5;
  const Eigen::VectorXd after = count_scaled_softmax(raised);
  CHECK(after(4) > base(4));
  for (Eigen::Index i = 0; i < 9; ++i) {
    if (i != 4) CHECK(after(i) < base(i));
  }
}

TEST_CASE("aggregation matches a per-pixel oracle on overlapping grids") {
  std::mt19937 rng(6);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int stride : {224, 112, 56}) {
    const TileGrid g = make_grid(672, 448, 224, stride);
    Eigen::VectorXd s(g.count());
    for (auto& v : s) v = u(rng);
    const ScoreGrid cells = aggregate(g, s);
    for (int cy = 0; cy < g.cells_y(); ++cy) {
      for (int cx = 0; cx < g.cells_x(); ++cx) {
        // Any pixel inside the cell sees the same covering tiles.
        const int px = cx * stride + stride / 2, py = cy * stride + stride / 2;
        double sum = 0.0;
        int n = 0;
        for (std::size_t t = 0; t < g.origins.size(); ++t) {
          const auto& o = g.origins[t];
          if (px >= o.x && px < o.x + 224 && py >= o.y && py < o.y + 224) {
            sum += s(static_cast<Eigen::Index>(t));
            ++n;
          }
        }
        REQUIRE(n > 0);
        CHECK(cells.scores(cy, cx) == doctest::Approx(sum / n).epsilon(1e-14));
      }
    }
    if (stride == 224) CHECK(cells.scores.mean() == doctest::Approx(s.mean()));
  }
}
