#include "semfilter/bdrate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/QR>

namespace semfilter {

RateQualityCurve::RateQualityCurve(std::string label, std::vector<RateQualityPoint> points)
    : label_(std::move(label)), points_(std::move(points)) {
  const std::string where = "curve '" + label_ + "': ";
  if (points_.size() < 2) throw std::invalid_argument(where + "needs at least 2 points");
  for (const auto& p : points_) {
    if (!std::isfinite(p.bpp) || !(p.bpp > 0.0)) throw std::invalid_argument(where + "bpp must be finite and > 0");
    if (!std::isfinite(p.quality)) throw std::invalid_argument(where + "quality must be finite");
  }
  std::sort(points_.begin(), points_.end(), [](const auto& a, const auto& b) { return a.bpp < b.bpp; });
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i].bpp > points_[i - 1].bpp)) throw std::invalid_argument(where + "duplicate bpp values");
    if (!(points_[i].quality > points_[i - 1].quality)) {
      throw std::invalid_argument(where + "quality is not strictly increasing with bpp");
    }
  }
}

namespace {

double sign(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }

double end_slope(double h0, double h1, double m0, double m1) {
  double d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
  if (sign(d) != sign(m0)) {
    d = 0.0;
  } else if (sign(m0) != sign(m1) && std::abs(d) > 3.0 * std::abs(m0)) {
    d = 3.0 * m0;
  }
  return d;
}

}  // namespace

Pchip::Pchip(Eigen::VectorXd x, Eigen::VectorXd y) : x_(std::move(x)), y_(std::move(y)) {
  const Eigen::Index n = x_.size();
  if (n < 2 || y_.size() != n) throw std::invalid_argument("Pchip: need >= 2 matching knots");
  for (Eigen::Index i = 1; i < n; ++i) {
    if (!(x_(i) > x_(i - 1))) throw std::invalid_argument("Pchip: x must be strictly increasing");
  }
  const Eigen::VectorXd h = x_.tail(n - 1) - x_.head(n - 1);
  const Eigen::VectorXd m = (y_.tail(n - 1) - y_.head(n - 1)).cwiseQuotient(h);
  d_.resize(n);
  if (n == 2) {
    d_.setConstant(m(0));
    return;
  }
  for (Eigen::Index k = 1; k < n - 1; ++k) {
    if (m(k - 1) * m(k) <= 0.0) {
      d_(k) = 0.0;
    } else {
      const double w1 = 2.0 * h(k) + h(k - 1);
      const double w2 = h(k) + 2.0 * h(k - 1);
      d_(k) = (w1 + w2) / (w1 / m(k - 1) + w2 / m(k));
    }
  }
  d_(0) = end_slope(h(0), h(1), m(0), m(1));
  d_(n - 1) = end_slope(h(n - 2), h(n - 3), m(n - 2), m(n - 3));
}

Eigen::Index Pchip::segment(double x) const {
  const auto* begin = x_.data();
  const auto* end = x_.data() + x_.size();
  const auto it = std::upper_bound(begin + 1, end - 1, x);
  return static_cast<Eigen::Index>(it - begin) - 1;
}

double Pchip::operator()(double x) const {
  const Eigen::Index k = segment(x);
  const double h = x_(k + 1) - x_(k);
  const double t = x - x_(k);
  const double m = (y_(k + 1) - y_(k)) / h;
  const double c2 = (3.0 * m - 2.0 * d_(k) - d_(k + 1)) / h;
  const double c3 = (d_(k) + d_(k + 1) - 2.0 * m) / (h * h);
  return y_(k) + t * (d_(k) + t * (c2 + t * c3));
}

double Pchip::segment_integral(Eigen::Index k, double t0, double t1) const {
  const double h = x_(k + 1) - x_(k);
  const double m = (y_(k + 1) - y_(k)) / h;
  const double c2 = (3.0 * m - 2.0 * d_(k) - d_(k + 1)) / h;
  const double c3 = (d_(k) + d_(k + 1) - 2.0 * m) / (h * h);
  auto antiderivative = [&](double t) {
    return t * (y_(k) + t * (d_(k) / 2.0 + t * (c2 / 3.0 + t * c3 / 4.0)));
  };
  return antiderivative(t1) - antiderivative(t0);
}

double Pchip::integral(double a, double b) const {
  if (a > b) return -integral(b, a);
  if (a < x_(0) || b > x_(x_.size() - 1)) throw std::invalid_argument("Pchip::integral outside the knot range");
  double total = 0.0;
  for (Eigen::Index k = 0; k + 1 < x_.size(); ++k) {
    const double lo = std::max(a, x_(k));
    const double hi = std::min(b, x_(k + 1));
    if (hi > lo) total += segment_integral(k, lo - x_(k), hi - x_(k));
  }
  return total;
}

namespace {

struct Samples {
  Eigen::VectorXd quality;
  Eigen::VectorXd log_rate;
};

Samples samples(const RateQualityCurve& c) {
  Samples s{Eigen::VectorXd(static_cast<Eigen::Index>(c.points().size())),
            Eigen::VectorXd(static_cast<Eigen::Index>(c.points().size()))};
  for (std::size_t i = 0; i < c.points().size(); ++i) {
    s.quality(static_cast<Eigen::Index>(i)) = c.points()[i].quality;
    s.log_rate(static_cast<Eigen::Index>(i)) = std::log10(c.points()[i].bpp);
  }
  return s;
}

// Least-squares polynomial of degree min(3, n-1) in quality, integrated exactly.
double cubic_integral(const Samples& s, double lo, double hi) {
  const Eigen::Index n = s.quality.size();
  const Eigen::Index degree = std::min<Eigen::Index>(3, n - 1);
  Eigen::MatrixXd vander(n, degree + 1);
  for (Eigen::Index j = 0; j <= degree; ++j) vander.col(j) = s.quality.array().pow(static_cast<double>(j));
  const Eigen::VectorXd coef = vander.colPivHouseholderQr().solve(s.log_rate);
  double total = 0.0;
  for (Eigen::Index j = 0; j <= degree; ++j) {
    const double p = static_cast<double>(j + 1);
    total += coef(j) * (std::pow(hi, p) - std::pow(lo, p)) / p;
  }
  return total;
}

}  // namespace

double bd_rate(const RateQualityCurve& anchor, const RateQualityCurve& test, BdMethod method) {
  const double lo = std::max(anchor.min_quality(), test.min_quality());
  const double hi = std::min(anchor.max_quality(), test.max_quality());
  if (!(hi > lo)) {
    throw std::invalid_argument("bd_rate: quality ranges of '" + anchor.label() + "' and '" + test.label() +
                                "' do not overlap");
  }
  for (const auto* c : {&anchor, &test}) {
    const auto inside = std::count_if(c->points().begin(), c->points().end(),
                                      [&](const auto& p) { return p.quality >= lo && p.quality <= hi; });
    if (inside < 2) {
      throw std::invalid_argument("bd_rate: curve '" + c->label() + "' has fewer than 2 points in the common quality range");
    }
  }
  const Samples a = samples(anchor);
  const Samples t = samples(test);
  double ia = 0.0;
  double it = 0.0;
  if (method == BdMethod::Pchip) {
    ia = Pchip(a.quality, a.log_rate).integral(lo, hi);
    it = Pchip(t.quality, t.log_rate).integral(lo, hi);
  } else {
    ia = cubic_integral(a, lo, hi);
    it = cubic_integral(t, lo, hi);
  }
  return (std::pow(10.0, (it - ia) / (hi - lo)) - 1.0) * 100.0;
}

}  // namespace semfilter
