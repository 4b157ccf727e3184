#include "semfilter/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace semfilter {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// Round step (1, 2 or 5 times a power of ten) giving about `target` intervals.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  return (r < 1.5 ? 1.0 : r < 3.0 ? 2.0 : r < 7.0 ? 5.0 : 10.0) * mag;
}

struct Axis {
  double lo, hi, step;
};

Axis make_axis(double lo, double hi) {
  if (!(hi > lo)) {
    const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
    lo -= pad;
    hi += pad;
  }
  const double step = nice_step(hi - lo, 5);
  return {std::floor(lo / step) * step, std::ceil(hi / step) * step, step};
}

}  // namespace

std::string render_svg(std::span<const PlotSeries> series, const std::string& title, const std::string& x_label,
                       const std::string& y_label, int width, int height) {
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  double ymin = xmin;
  double ymax = -xmin;
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      xmin = std::min(xmin, p.bpp);
      xmax = std::max(xmax, p.bpp);
      ymin = std::min(ymin, p.quality);
      ymax = std::max(ymax, p.quality);
    }
  }
  if (!std::isfinite(xmin)) throw std::invalid_argument("render_svg: no points to plot");
  const Axis ax = make_axis(xmin, xmax);
  const Axis ay = make_axis(ymin, ymax);

  const double left = 70, right = 180, top = 40, bottom = 55;
  const double pw = width - left - right;
  const double ph = height - top - bottom;
  auto sx = [&](double x) { return left + (x - ax.lo) / (ax.hi - ax.lo) * pw; };
  auto sy = [&](double y) { return top + ph - (y - ay.lo) / (ay.hi - ay.lo) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
      << "</text>\n";

  for (double t = ax.lo; t <= ax.hi + ax.step * 1e-9; t += ax.step) {
    svg << "<line x1=\"" << sx(t) << "\" y1=\"" << top << "\" x2=\"" << sx(t) << "\" y2=\"" << top + ph
        << "\" stroke=\"#e0e0e0\"/>\n<text x=\"" << sx(t) << "\" y=\"" << top + ph + 16
        << "\" text-anchor=\"middle\">" << fmt(t) << "</text>\n";
  }
  for (double t = ay.lo; t <= ay.hi + ay.step * 1e-9; t += ay.step) {
    svg << "<line x1=\"" << left << "\" y1=\"" << sy(t) << "\" x2=\"" << left + pw << "\" y2=\"" << sy(t)
        << "\" stroke=\"#e0e0e0\"/>\n<text x=\"" << left - 6 << "\" y=\"" << sy(t) + 4
        << "\" text-anchor=\"end\">" << fmt(t) << "</text>\n";
  }
  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n"
      << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 14 << "\" text-anchor=\"middle\">" << escape(x_label)
      << "</text>\n"
      << "<text transform=\"translate(18," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(y_label) << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = kPalette[i % std::size(kPalette)];
    auto pts = s.points;
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.bpp < b.bpp; });
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& p : pts) svg << sx(p.bpp) << ',' << sy(p.quality) << ' ';
    svg << "\"/>\n";
    for (const auto& p : pts) {
      svg << "<circle cx=\"" << sx(p.bpp) << "\" cy=\"" << sy(p.quality) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    const double ly = top + 14 + 18.0 * static_cast<double>(i);
    svg << "<line x1=\"" << left + pw + 14 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 34 << "\" y2=\"" << ly
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n<text x=\"" << left + pw + 40 << "\" y=\"" << ly + 4
        << "\">" << escape(s.label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::vector<PlotSeries> series_from_summary(const nlohmann::json& summary, const std::optional<std::string>& codec) {
  std::vector<PlotSeries> out;
  if (!summary.contains("curves")) throw std::invalid_argument("summary has no 'curves' array");
  for (const auto& c : summary.at("curves")) {
    const auto name = c.at("codec").get<std::string>();
    if (codec && name != *codec) continue;
    PlotSeries s{name + " " + c.at("mode").get<std::string>(), {}};
    for (const auto& p : c.at("points")) s.points.push_back({p.at("bpp").get<double>(), p.at("quality").get<double>()});
    if (!s.points.empty()) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace semfilter
