#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace semfilter {

struct RateQualityPoint {
  double bpp = 0.0;
  double quality = 0.0;  // accuracy % or fidelity proxy
};

/// Points sorted by ascending bpp with quality strictly increasing along them.
class RateQualityCurve {
public:
  /// Sorts by bpp and validates: at least 2 points, bpp finite, positive and distinct,
  /// quality finite and strictly increasing with bpp. Non-monotone curves are
  /// rejected with std::invalid_argument instead of being reordered by quality.
  RateQualityCurve(std::string label, std::vector<RateQualityPoint> points);

  const std::string& label() const noexcept { return label_; }
  const std::vector<RateQualityPoint>& points() const noexcept { return points_; }
  double min_quality() const { return points_.front().quality; }
  double max_quality() const { return points_.back().quality; }

private:
  std::string label_;
  std::vector<RateQualityPoint> points_;
};

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes with the
/// non-centred three-point end conditions). Two knots give the straight line.
class Pchip {
public:
  Pchip(Eigen::VectorXd x, Eigen::VectorXd y);

  double operator()(double x) const;
  /// Exact integral over [a, b] within the knot range.
  double integral(double a, double b) const;

  const Eigen::VectorXd& slopes() const noexcept { return d_; }

private:
  Eigen::Index segment(double x) const;
  double segment_integral(Eigen::Index k, double t0, double t1) const;

  Eigen::VectorXd x_;
  Eigen::VectorXd y_;
  Eigen::VectorXd d_;
};

enum class BdMethod {
  Pchip,  // monotone piecewise cubic
  Cubic,  // classic least-squares cubic polynomial
};

/// Average bitrate difference of `test` relative to `anchor` at equal quality, in percent.
/// log10(bpp) is interpolated as a function of quality over the common quality
/// interval, which must hold at least 2 points of each curve.
double bd_rate(const RateQualityCurve& anchor, const RateQualityCurve& test, BdMethod method = BdMethod::Pchip);

}  // namespace semfilter
