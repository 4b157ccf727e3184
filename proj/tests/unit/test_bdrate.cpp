#include <doctest.h>

#include <cmath>

#include "semfilter/bdrate.hpp"
#include "support.hpp"

using namespace semfilter;

namespace {

RateQualityCurve curve_from(const nlohmann::json& j, const std::string& label) {
  std::vector<RateQualityPoint> pts;
  for (std::size_t i = 0; i < j["bpp"].size(); ++i) pts.push_back({j["bpp"][i], j["quality"][i]});
  return {label, pts};
}

}  // namespace

TEST_CASE("curve validation") {
  const RateQualityCurve c("c", {{2.0, 80}, {0.5, 60}, {1.0, 70}});
  CHECK(c.points().front().bpp == 0.5);
  CHECK(c.min_quality() == 60);
  CHECK(c.max_quality() == 80);
  CHECK_THROWS_AS(RateQualityCurve("x", {{1.0, 50}}), std::invalid_argument);
  CHECK_THROWS_AS(RateQualityCurve("x", {{1.0, 50}, {1.0, 60}}), std::invalid_argument);
  CHECK_THROWS_AS(RateQualityCurve("x", {{0.0, 50}, {1.0, 60}}), std::invalid_argument);
  CHECK_THROWS_AS(RateQualityCurve("x", {{0.5, 60}, {1.0, 55}}), std::invalid_argument);
  CHECK_THROWS_AS(RateQualityCurve("x", {{0.5, NAN}, {1.0, 55}}), std::invalid_argument);
}

TEST_CASE("pchip matches the scipy interpolant") {
  const auto o = testing::read_json(testing::data_dir() / "oracles.json")["bd_rate"];
  const auto q = o["anchor"]["quality"].get<std::vector<double>>();
  auto bpp = o["anchor"]["bpp"].get<std::vector<double>>();
  Eigen::VectorXd x(4), y(4);
  for (int i = 0; i < 4; ++i) x(i) = q[static_cast<std::size_t>(i)], y(i) = std::log10(bpp[static_cast<std::size_t>(i)]);
  const Pchip p(x, y);
  const auto probes = o["anchor_pchip_probes"];
  for (std::size_t i = 0; i < probes["x"].size(); ++i) {
    CHECK(p(probes["x"][i].get<double>()) == doctest::Approx(probes["y"][i].get<double>()).epsilon(1e-12));
  }
  for (int i = 0; i < 4; ++i) CHECK(p.slopes()(i) == doctest::Approx(probes["slopes"][static_cast<std::size_t>(i)].get<double>()).epsilon(1e-12));

  testing::ReferencePchip ref(q, {y.data(), y.data() + 4});
  CHECK(p.integral(61.0, 79.0) == doctest::Approx(ref.dense_integral(61.0, 79.0)).epsilon(1e-9));
  CHECK(p.integral(70.0, 70.0) == 0.0);
}

TEST_CASE("two knots interpolate linearly") {
  Eigen::VectorXd x(2), y(2);
  x << 0.0, 2.0;
  y << 1.0, 5.0;
  const Pchip p(x, y);
  CHECK(p(0.5) == doctest::Approx(2.0));
  CHECK(p.integral(0.0, 2.0) == doctest::Approx(6.0));
}

TEST_CASE("bd rate oracles") {
  const auto o = testing::read_json(testing::data_dir() / "oracles.json")["bd_rate"];
  const auto a = curve_from(o["anchor"], "anchor");
  const auto t = curve_from(o["test"], "test");
  CHECK(bd_rate(a, a) == doctest::Approx(0.0));
  CHECK(bd_rate(a, t) == doctest::Approx(o["pchip_percent"].get<double>()).epsilon(1e-9));
  CHECK(bd_rate(a, t, BdMethod::Cubic) == doctest::Approx(o["cubic_percent"].get<double>()).epsilon(1e-7));
}

TEST_CASE("halving every rate gives minus fifty percent") {
  const RateQualityCurve a("a", {{0.3, 30}, {0.7, 45}, {1.4, 52}, {3.1, 60}});
  std::vector<RateQualityPoint> half;
  for (const auto& p : a.points()) half.push_back({p.bpp / 2, p.quality});
  const RateQualityCurve h("h", half);
  CHECK(bd_rate(a, h) == doctest::Approx(-50.0).epsilon(1e-12));
  CHECK(bd_rate(a, h, BdMethod::Cubic) == doctest::Approx(-50.0).epsilon(1e-9));
  CHECK(bd_rate(h, a) == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("insufficient overlap is rejected") {
  const RateQualityCurve a("a", {{0.3, 30}, {0.7, 45}, {1.4, 52}});
  const RateQualityCurve far("b", {{0.3, 60}, {0.7, 70}});
  CHECK_THROWS_AS(bd_rate(a, far), std::invalid_argument);
  const RateQualityCurve thin("c", {{0.2, 20}, {0.5, 40}, {2.0, 90}});
  CHECK_THROWS_AS(bd_rate(a, thin), std::invalid_argument);  // only one point of c in [30, 52]
}

TEST_CASE("bd-rate is antisymmetric in sign and scale invariant") {
  const auto o = testing::read_json(testing::data_dir() / "oracles.json")["bd_rate"];
  const RateQualityCurve a = curve_from(o["anchor"], "a"), t = curve_from(o["test"], "t");
  for (BdMethod m : {BdMethod::Pchip, BdMethod::Cubic}) {
    const double forward = bd_rate(a, t, m), backward = bd_rate(t, a, m);
    CHECK(forward * backward < 0.0);
    for (double factor : {0.01, 3.7, 250.0}) {
      auto scaled = [&](const nlohmann::json& j, const std::string& label) {
        nlohmann::json s = j;
        for (auto& b : s["bpp"]) b = b.get<double>() * factor;
        return curve_from(s, label);
      };
      CHECK(bd_rate(scaled(o["anchor"], "a"), scaled(o["test"], "t"), m) == doctest::Approx(forward).epsilon(1e-9));
    }
  }
}
