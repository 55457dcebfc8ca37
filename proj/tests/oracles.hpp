#pragma once
// Independent checks shared by the carving unit tests and the acceptance run.
// Nothing here calls the carver: patterns come from plain double forward passes.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "carvelab/carver.hpp"
#include "carvelab/netspec.hpp"
#include "carvelab/rng.hpp"

namespace oracle {

using carvelab::Rational;

/// Random pure relu net: 2 inputs, `layers` relu layers of 1..max_width
/// neurons, one linear output. Weights are small rationals.
inline carvelab::Network random_relu_net(carvelab::Rng& rng, std::size_t layers, std::size_t max_width,
                                         std::size_t input_dim = 2) {
  using namespace carvelab;
  auto r = [&](long span, long den) { return Rational(static_cast<long>(rng() % (2 * span + 1)) - span, den); };
  std::vector<NeuronDecl> decls;
  std::vector<std::string> prev;
  for (std::size_t j = 0; j < input_dim; ++j) {
    decls.push_back({"x" + std::to_string(j), NeuronKind::Input, {}, 0});
    prev.push_back(decls.back().id);
  }
  for (std::size_t l = 1; l <= layers; ++l) {
    const std::size_t width = 1 + rng() % max_width;
    std::vector<std::string> cur;
    for (std::size_t k = 0; k < width; ++k) {
      NeuronDecl d{"h" + std::to_string(l) + "_" + std::to_string(k), NeuronKind::Relu, {}, r(12, 8)};
      for (const auto& p : prev) d.incoming.push_back({p, r(12, 6)});
      decls.push_back(d);
      cur.push_back(d.id);
    }
    prev = cur;
  }
  NeuronDecl y{"y", NeuronKind::Linear, {}, r(4, 3)};
  for (const auto& p : prev) y.incoming.push_back({p, r(6, 5)});
  decls.push_back(y);
  return Network(std::move(decls), input_dim, "random");
}

/// Preactivation signs of every relu neuron, via a double forward pass.
/// Returns false when some preactivation is within `tie` of zero, unless it
/// stays there at nearby points too: a neuron fed only by dead units with
/// zero bias is identically 0 there, which counts as inactive.
inline bool sample_pattern(const carvelab::Network& net, const std::vector<double>& x, std::string& out,
                           double tie = 1e-12) {
  const auto z = carvelab::preactivations(net, x);
  out.clear();
  std::vector<std::vector<double>> nearby;
  for (auto i : net.relu_neurons()) {
    if (std::abs(z[i]) <= tie) {
      if (nearby.empty())
        for (const auto& [dx, dy] : {std::pair{1e-7, 0.0}, {0.0, 1e-7}, {-7e-8, -7e-8}})
          nearby.push_back(carvelab::preactivations(net, std::vector<double>{x[0] + dx, x[1] + dy}));
      for (const auto& zn : nearby)
        if (std::abs(zn[i]) > tie) return false;
    }
    out.push_back(z[i] > 0 ? 'A' : 'I');
  }
  return true;
}

/// Distinct patterns at the centres of a g-by-g grid over [x0,x1]x[y0,y1].
inline std::set<std::string> grid_patterns(const carvelab::Network& net, double x0, double x1, double y0, double y1,
                                           std::size_t g) {
  std::set<std::string> seen;
  std::string p;
  for (std::size_t i = 0; i < g; ++i)
    for (std::size_t j = 0; j < g; ++j) {
      const std::vector<double> x{x0 + (x1 - x0) * (static_cast<double>(i) + 0.5) / static_cast<double>(g),
                                  y0 + (y1 - y0) * (static_cast<double>(j) + 0.5) / static_cast<double>(g)};
      if (sample_pattern(net, x, p)) seen.insert(p);
    }
  return seen;
}

struct GridComparison {
  std::size_t grid_only = 0;        ///< sampled patterns the carving lacks (must be 0)
  std::size_t sub_resolution = 0;   ///< carved regions between grid points, confirmed by local resampling
  std::size_t unconfirmed = 0;      ///< carved regions no forward sample could find (must be 0)
  std::size_t grid_point_inside = 0;///< missed regions that contain a grid centre (must be 0)
  bool ok() const { return grid_only == 0 && unconfirmed == 0 && grid_point_inside == 0; }
};

/// Compares a carving against forward sampling on a g-by-g grid. Regions
/// the grid misses must contain no grid centre; their existence is then
/// confirmed by a finer forward-only resample of their bounding box.
inline GridComparison compare_with_grid(const carvelab::Network& net, const carvelab::Carving& carving, std::size_t g) {
  using namespace carvelab;
  const double x0 = to_double(carving.box.lo[0]), x1 = to_double(carving.box.hi[0]);
  const double y0 = to_double(carving.box.lo[1]), y1 = to_double(carving.box.hi[1]);
  const auto seen = grid_patterns(net, x0, x1, y0, y1, g);
  std::set<std::string> carved;
  for (const auto& r : carving.regions) carved.insert(r.pattern.str());
  GridComparison out;
  for (const auto& p : seen)
    if (!carved.count(p)) ++out.grid_only;
  for (const auto& r : carving.regions) {
    const std::string want = r.pattern.str();
    if (seen.count(want)) continue;
    ++out.sub_resolution;
    double bx0 = 1e300, bx1 = -1e300, by0 = 1e300, by1 = -1e300;
    for (const auto& v : r.polygon) {
      bx0 = std::min(bx0, to_double(v.x));
      bx1 = std::max(bx1, to_double(v.x));
      by0 = std::min(by0, to_double(v.y));
      by1 = std::max(by1, to_double(v.y));
    }
    // Any grid centre strictly inside the polygon would have been sampled.
    const double hx = (x1 - x0) / static_cast<double>(g), hy = (y1 - y0) / static_cast<double>(g);
    const auto i0 = static_cast<long>(std::floor((bx0 - x0) / hx - 0.5)), i1 = static_cast<long>(std::ceil((bx1 - x0) / hx));
    const auto j0 = static_cast<long>(std::floor((by0 - y0) / hy - 0.5)), j1 = static_cast<long>(std::ceil((by1 - y0) / hy));
    const Rational rx0 = carving.box.lo[0], ry0 = carving.box.lo[1];
    const Rational rhx = (carving.box.hi[0] - rx0) / static_cast<long>(g), rhy = (carving.box.hi[1] - ry0) / static_cast<long>(g);
    for (long i = std::max(0L, i0); i <= std::min<long>(i1, static_cast<long>(g) - 1); ++i)
      for (long j = std::max(0L, j0); j <= std::min<long>(j1, static_cast<long>(g) - 1); ++j) {
        const Point2 c{rx0 + rhx * Rational(2 * i + 1, 2), ry0 + rhy * Rational(2 * j + 1, 2)};
        if (strictly_inside(r.polygon, c)) ++out.grid_point_inside;
      }
    const auto local = grid_patterns(net, bx0, bx1, by0, by1, 400);
    if (!local.count(want)) ++out.unconfirmed;
  }
  return out;
}

/// Exact area sum of all regions minus the box area (0 when they tile it).
inline Rational tiling_defect(const carvelab::Carving& c) {
  Rational sum = 0;
  for (const auto& r : c.regions) sum += carvelab::area(r.polygon);
  const Rational box = (c.box.hi[0] - c.box.lo[0]) * (c.box.hi[1] - c.box.lo[1]);
  return sum - box;
}

/// Along every segment shared by two regions, both affine pieces must give
/// the same value (checked exactly at the overlap endpoints). Returns the
/// number of disagreements and counts the shared segments in `shared`.
inline std::size_t continuity_violations(const carvelab::Carving& c, std::size_t& shared) {
  using namespace carvelab;
  struct EdgeRef {
    std::size_t region;
    Point2 a, b;
  };
  std::map<Line2, std::vector<EdgeRef>> by_line;
  for (std::size_t r = 0; r < c.regions.size(); ++r) {
    const auto& poly = c.regions[r].polygon;
    for (std::size_t k = 0; k < poly.size(); ++k) {
      const Point2& a = poly[k];
      const Point2& b = poly[(k + 1) % poly.size()];
      by_line[line_through(a, b)].push_back({r, a, b});
    }
  }
  auto param = [](const Line2& l, const Point2& p) { return l.b != 0 ? p.x : p.y; };
  std::size_t bad = 0;
  shared = 0;
  for (const auto& [l, edges] : by_line)
    for (std::size_t u = 0; u < edges.size(); ++u)
      for (std::size_t v = u + 1; v < edges.size(); ++v) {
        if (edges[u].region == edges[v].region) continue;
        Point2 ua = edges[u].a, ub = edges[u].b, va = edges[v].a, vb = edges[v].b;
        if (param(l, ub) < param(l, ua)) std::swap(ua, ub);
        if (param(l, vb) < param(l, va)) std::swap(va, vb);
        const Point2 lo = param(l, ua) < param(l, va) ? va : ua;
        const Point2 hi = param(l, ub) < param(l, vb) ? ub : vb;
        if (!(param(l, lo) < param(l, hi))) continue;
        ++shared;
        const auto& fu = c.regions[edges[u].region].functions;
        const auto& fv = c.regions[edges[v].region].functions;
        for (const auto& [id, f] : fu) {
          const auto& g = fv.at(id);
          for (const Point2& p : {lo, hi}) {
            const std::vector<Rational> x{p.x, p.y};
            if (f.evaluate(std::span<const Rational>(x)) != g.evaluate(std::span<const Rational>(x))) ++bad;
          }
        }
      }
  return bad;
}

}  // namespace oracle
