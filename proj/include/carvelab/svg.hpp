#pragma once

#include <array>
#include <string>
#include <vector>

#include "carvelab/carver.hpp"
#include "carvelab/geometry.hpp"

namespace carvelab {

struct SvgScene {
  Box box;
  std::vector<Polygon> regions;
  std::vector<BendSegment> bends;
  std::vector<DecisionPiece> decisions;
  std::vector<Polyline> contours;
  std::vector<std::array<double, 2>> points;
};

struct SvgStyle {
  double width = 640.0;
  double height = 640.0;
  double margin = 16.0;
};

/// Region fills, then decision shading, then bend chords (class `layer-k`),
/// contours and points, each group in input order. Throws EmptyGeometry
/// when there is nothing to draw.
std::string render_svg(const SvgScene& scene, const SvgStyle& style = {});

/// Row-major grid as a grey-to-colour heat map; row 0 is drawn at the bottom.
std::string render_heatmap_svg(const std::vector<double>& values, std::size_t rows, std::size_t cols,
                               const SvgStyle& style = {});

/// Scene for a carving: every region polygon plus every bend chord.
SvgScene carving_scene(const Carving& carving);

}  // namespace carvelab
