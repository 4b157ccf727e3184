#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "semfilter/bdrate.hpp"

namespace semfilter {

struct PlotSeries {
  std::string label;
  std::vector<RateQualityPoint> points;
};

/// Rate-quality line chart (bpp on x) as a standalone SVG document.
std::string render_svg(std::span<const PlotSeries> series, const std::string& title, const std::string& x_label,
                       const std::string& y_label, int width = 720, int height = 480);

/// One series per curve of a benchmark summary, optionally restricted to one codec.
std::vector<PlotSeries> series_from_summary(const nlohmann::json& summary,
                                            const std::optional<std::string>& codec = std::nullopt);

}  // namespace semfilter
