#include "carvelab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "carvelab/error.hpp"

namespace carvelab {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  std::string s = buf;
  if (s == "-0.0000") s = "0.0000";
  return s;
}

const char* const kLayerColours[] = {"#1f4e79", "#b03a2e", "#1e8449", "#7d3c98", "#b9770e", "#117a65", "#5d6d7e"};

std::string region_fill(std::size_t i) {
  // Golden-angle hue walk, fixed saturation/lightness.
  const double hue = std::fmod(static_cast<double>(i) * 137.50776405, 360.0);
  char buf[48];
  std::snprintf(buf, sizeof buf, "hsl(%.1f,55%%,82%%)", hue);
  return buf;
}

struct Frame {
  double x0, x1, y0, y1;
  SvgStyle style;
  double px(double x) const { return style.margin + (x - x0) / (x1 - x0) * (style.width - 2 * style.margin); }
  double py(double y) const {
    return style.height - style.margin - (y - y0) / (y1 - y0) * (style.height - 2 * style.margin);
  }
};

std::string points_attr(const Frame& f, const Polygon& poly) {
  std::string s;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    if (k) s += ' ';
    s += num(f.px(to_double(poly[k].x))) + "," + num(f.py(to_double(poly[k].y)));
  }
  return s;
}

std::string header(const SvgStyle& style) {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(style.width) << "\" height=\""
     << num(style.height) << "\" viewBox=\"0 0 " << num(style.width) << ' ' << num(style.height) << "\">\n";
  return os.str();
}

}  // namespace

std::string render_svg(const SvgScene& scene, const SvgStyle& style) {
  if (scene.regions.empty() && scene.decisions.empty() && scene.contours.empty() && scene.points.empty() &&
      scene.bends.empty())
    throw EmptyGeometry("nothing to draw");
  if (scene.box.dim() != 2) throw DimensionMismatch("SVG rendering needs a 2-D box");
  scene.box.validate();
  const Frame f{to_double(scene.box.lo[0]), to_double(scene.box.hi[0]), to_double(scene.box.lo[1]),
                to_double(scene.box.hi[1]), style};

  std::set<std::size_t> layers;
  for (const auto& b : scene.bends) layers.insert(b.layer);

  std::ostringstream os;
  os << header(style);
  os << "<style>\n";
  os << "  .region { stroke: #333333; stroke-width: 0.6; }\n";
  os << "  .cat { fill: #f5b041; fill-opacity: 0.55; stroke: none; }\n";
  os << "  .dog { fill: #5dade2; fill-opacity: 0.55; stroke: none; }\n";
  os << "  .indecision { fill: #d5d8dc; fill-opacity: 0.55; stroke: none; }\n";
  for (auto l : layers)
    os << "  .layer-" << l << " { stroke: " << kLayerColours[(l == 0 ? 0 : l - 1) % std::size(kLayerColours)]
       << "; stroke-width: " << num(std::max(0.8, 2.6 - 0.5 * static_cast<double>(l))) << "; fill: none; }\n";
  os << "  .contour { stroke: #000000; stroke-width: 1.2; fill: none; }\n";
  os << "  .sample { fill: #000000; }\n";
  os << "</style>\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << num(style.width) << "\" height=\"" << num(style.height)
     << "\" fill=\"#ffffff\"/>\n";

  for (std::size_t i = 0; i < scene.regions.size(); ++i)
    os << "<polygon class=\"region\" fill=\"" << region_fill(i) << "\" points=\"" << points_attr(f, scene.regions[i])
       << "\"/>\n";
  for (const auto& d : scene.decisions) {
    std::string label(decision_name(d.label));
    std::transform(label.begin(), label.end(), label.begin(), [](unsigned char c) { return std::tolower(c); });
    os << "<polygon class=\"" << label << "\" points=\"" << points_attr(f, d.polygon) << "\"/>\n";
  }
  for (const auto& b : scene.bends)
    os << "<line class=\"layer-" << b.layer << "\" x1=\"" << num(f.px(to_double(b.from.x))) << "\" y1=\""
       << num(f.py(to_double(b.from.y))) << "\" x2=\"" << num(f.px(to_double(b.to.x))) << "\" y2=\""
       << num(f.py(to_double(b.to.y))) << "\"/>\n";
  for (const auto& line : scene.contours) {
    os << "<polyline class=\"contour\" points=\"";
    for (std::size_t k = 0; k < line.size(); ++k)
      os << (k ? " " : "") << num(f.px(line[k][0])) << ',' << num(f.py(line[k][1]));
    os << "\"/>\n";
  }
  for (const auto& p : scene.points)
    os << "<circle class=\"sample\" cx=\"" << num(f.px(p[0])) << "\" cy=\"" << num(f.py(p[1])) << "\" r=\"1.5\"/>\n";
  os << "</svg>\n";
  return os.str();
}

std::string render_heatmap_svg(const std::vector<double>& values, std::size_t rows, std::size_t cols,
                               const SvgStyle& style) {
  if (values.empty() || rows == 0 || cols == 0) throw EmptyGeometry("empty grid");
  if (values.size() != rows * cols) throw DimensionMismatch("grid size differs from rows x cols");
  double lo = values[0], hi = values[0];
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double span = hi > lo ? hi - lo : 1.0;
  const double cw = (style.width - 2 * style.margin) / static_cast<double>(cols);
  const double ch = (style.height - 2 * style.margin) / static_cast<double>(rows);
  std::ostringstream os;
  os << header(style);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = values[r * cols + c];
      const double t = std::isfinite(v) ? (v - lo) / span : 1.0;
      // Low loss dark blue, high loss pale yellow.
      const int red = static_cast<int>(std::lround(30 + 220 * t));
      const int green = static_cast<int>(std::lround(40 + 200 * t));
      const int blue = static_cast<int>(std::lround(120 + 40 * (1.0 - t)));
      char fill[16];
      std::snprintf(fill, sizeof fill, "#%02x%02x%02x", red, green, blue);
      os << "<rect x=\"" << num(style.margin + static_cast<double>(c) * cw) << "\" y=\""
         << num(style.height - style.margin - static_cast<double>(r + 1) * ch) << "\" width=\"" << num(cw)
         << "\" height=\"" << num(ch) << "\" fill=\"" << fill << "\"/>\n";
    }
  os << "</svg>\n";
  return os.str();
}

SvgScene carving_scene(const Carving& carving) {
  SvgScene scene;
  scene.box = carving.box;
  for (const auto& r : carving.regions) scene.regions.push_back(r.polygon);
  scene.bends = carving.bends;
  return scene;
}

}  // namespace carvelab
