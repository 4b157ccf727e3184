#include <doctest.h>

#include "semfilter/plot.hpp"

using namespace semfilter;

TEST_CASE("svg contains one polyline per series and escapes labels") {
  const std::vector<PlotSeries> series{{"none", {{0.5, 0.9}, {1.0, 0.95}}}, {"a<b", {{0.4, 0.9}, {0.9, 0.96}}}};
  const std::string svg = render_svg(series, "jpeg & co", "bpp", "quality");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  std::size_t lines = 0;
  for (std::size_t at = svg.find("<polyline"); at != std::string::npos; at = svg.find("<polyline", at + 1)) ++lines;
  CHECK(lines == 2);
  CHECK(svg.find("a&lt;b") != std::string::npos);
  CHECK(svg.find("jpeg &amp; co") != std::string::npos);
}

TEST_CASE("series come from benchmark summaries") {
  const auto summary = nlohmann::json::parse(R"({"curves":[
    {"codec":"jpeg","mode":"none","points":[{"bpp":1.0,"quality":0.9,"param":50}]},
    {"codec":"hevc","mode":"none","points":[{"bpp":0.5,"quality":0.8,"param":32}]}]})");
  CHECK(series_from_summary(summary).size() == 2);
  const auto jpeg = series_from_summary(summary, std::string("jpeg"));
  REQUIRE(jpeg.size() == 1);
  CHECK(jpeg[0].label.find("none") != std::string::npos);
  CHECK(jpeg[0].points[0].bpp == 1.0);
}
