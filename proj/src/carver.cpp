#include "carvelab/carver.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <unordered_map>

#include "carvelab/error.hpp"
#include "carvelab/lp.hpp"

namespace carvelab {

AffineFunction AffineFunction::coordinate(std::size_t dim, std::size_t k) {
  auto f = zero(dim);
  f.coefficients.at(k) = 1;
  return f;
}

bool AffineFunction::is_constant() const {
  return std::all_of(coefficients.begin(), coefficients.end(), [](const Rational& v) { return v == 0; });
}

Rational AffineFunction::evaluate(std::span<const Rational> x) const {
  Rational v = constant;
  for (std::size_t j = 0; j < coefficients.size(); ++j) v += coefficients[j] * x[j];
  return v;
}

double AffineFunction::evaluate(std::span<const double> x) const {
  double v = to_double(constant);
  for (std::size_t j = 0; j < coefficients.size(); ++j) v += to_double(coefficients[j]) * x[j];
  return v;
}

void AffineFunction::add_scaled(const AffineFunction& other, const Rational& weight) {
  if (weight == 0) return;
  for (std::size_t j = 0; j < coefficients.size(); ++j)
    if (other.coefficients[j] != 0) coefficients[j] += weight * other.coefficients[j];
  if (other.constant != 0) constant += weight * other.constant;
}

std::vector<std::size_t> layered_order(const Network& net) {
  std::vector<std::size_t> order = net.order();
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return net.layer(a) < net.layer(b); });
  return order;
}

namespace {

AffineFunction preactivation(const Network& net, std::size_t i, const std::vector<AffineFunction>& aff) {
  AffineFunction pre = AffineFunction::zero(net.input_dim());
  pre.constant = net.bias(i);
  for (const auto& e : net.inputs_of(i)) pre.add_scaled(aff[e.source], e.weight);
  return pre;
}

std::vector<AffineFunction> initial_affines(const Network& net) {
  std::vector<AffineFunction> aff(net.size(), AffineFunction::zero(net.input_dim()));
  const auto& inputs = net.input_neurons();
  for (std::size_t k = 0; k < inputs.size(); ++k) aff[inputs[k]] = AffineFunction::coordinate(net.input_dim(), k);
  return aff;
}

void require_piecewise_linear(const Network& net) {
  for (const auto& d : net.neurons())
    if (d.kind == NeuronKind::Mul)
      throw UnsupportedNeuron("mul neuron '" + d.id + "' makes the function piecewise polynomial");
}

bool on_box_boundary(const Point2& p, const Point2& q, const Box& box) {
  return (p.x == q.x && (p.x == box.lo[0] || p.x == box.hi[0])) ||
         (p.y == q.y && (p.y == box.lo[1] || p.y == box.hi[1]));
}

std::map<std::string, AffineFunction> output_functions(const Network& net, const std::vector<AffineFunction>& aff,
                                                       const std::vector<AffineFunction>& logits) {
  std::map<std::string, AffineFunction> out;
  for (std::size_t o : net.outputs())
    out.emplace(net.neuron(o).id, net.kind(o) == NeuronKind::Sigmoid ? logits[o] : aff[o]);
  return out;
}

}  // namespace

Carving carve_exact_2d(const Network& net, const Box& box, const CarveOptions& options) {
  if (net.input_dim() != 2) throw DimensionMismatch("exact carving needs a 2-D input space");
  if (box.dim() != 2) throw DimensionMismatch("carving box must be 2-D");
  box.validate();
  require_piecewise_linear(net);

  struct Work {
    Polygon polygon;
    std::vector<Activation> bits;
    std::vector<AffineFunction> aff;
  };
  const std::size_t relu_count = net.relu_neurons().size();
  std::vector<Work> cells;
  cells.push_back({box_polygon(box), std::vector<Activation>(relu_count, Activation::Inactive),
                   initial_affines(net)});

  Carving out;
  out.box = box;
  out.counts_after_layer.assign(net.depth(), 1);

  const auto order = layered_order(net);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const std::size_t i = order[pos];
    const auto kind = net.kind(i);
    if (kind != NeuronKind::Input) {
      std::vector<Work> next;
      next.reserve(cells.size() + 8);
      for (auto& w : cells) {
        AffineFunction pre = preactivation(net, i, w.aff);
        if (kind != NeuronKind::Relu) {
          w.aff[i] = std::move(pre);
          next.push_back(std::move(w));
          continue;
        }
        const std::size_t slot = net.relu_slot(i);
        if (pre.is_constant()) {
          const bool on = pre.constant > 0;
          w.bits[slot] = on ? Activation::Active : Activation::Inactive;
          w.aff[i] = on ? std::move(pre) : AffineFunction::zero(2);
          next.push_back(std::move(w));
          continue;
        }
        auto parts = split_polygon(w.polygon, pre.coefficients[0], pre.coefficients[1], pre.constant);
        if (!parts.positive.empty() && !parts.negative.empty()) {
          for (const auto& p : {parts.chord_from, parts.chord_to})
            if (bit_size(p.x) > options.max_bits || bit_size(p.y) > options.max_bits)
              throw ExactArithmeticOverflow("vertex coordinates exceed " + std::to_string(options.max_bits) +
                                            " bits; try a smaller box");
          out.bends.push_back({i, net.layer(i), parts.chord_from, parts.chord_to});
        }
        if (!parts.negative.empty()) {
          Work neg{std::move(parts.negative), w.bits, w.aff};
          neg.bits[slot] = Activation::Inactive;
          neg.aff[i] = AffineFunction::zero(2);
          next.push_back(std::move(neg));
        }
        if (!parts.positive.empty()) {
          w.polygon = std::move(parts.positive);
          w.bits[slot] = Activation::Active;
          w.aff[i] = std::move(pre);
          next.push_back(std::move(w));
        }
      }
      cells = std::move(next);
    }
    const bool layer_done = pos + 1 == order.size() || net.layer(order[pos + 1]) != net.layer(i);
    if (layer_done && net.layer(i) > 0) out.counts_after_layer[net.layer(i) - 1] = cells.size();
  }

  out.regions.reserve(cells.size());
  for (auto& w : cells) {
    CarvedRegion r;
    r.pattern.bits = std::move(w.bits);
    const auto c = vertex_centroid(w.polygon);
    r.interior_point = {c.x, c.y};
    for (std::size_t k = 0; k < w.polygon.size(); ++k)
      if (on_box_boundary(w.polygon[k], w.polygon[(k + 1) % w.polygon.size()], box)) r.clipped = true;
    for (std::size_t o : net.outputs()) r.functions.emplace(net.neuron(o).id, w.aff[o]);
    r.polygon = std::move(w.polygon);
    out.regions.push_back(std::move(r));
  }
  std::sort(out.regions.begin(), out.regions.end(),
            [](const CarvedRegion& a, const CarvedRegion& b) { return a.pattern < b.pattern; });
  return out;
}

namespace {

struct SignSearch {
  const Network& net;
  const Box& box;
  const SignvectorOptions& options;
  std::vector<std::size_t> order;
  std::vector<double> lo, hi;

  std::vector<AffineFunction> constraints;  // each must be > 0 on the cell
  std::vector<PatternWitness> found;

  struct Witness {
    std::vector<double> point;
    std::vector<Rational> exact;
  };

  // Returns a witness strictly satisfying constraints + extra, if one exists.
  std::optional<Witness> feasible(const AffineFunction& extra, const Witness& current) {
    const std::size_t dim = net.input_dim();
    if (options.mode == LpMode::Exact) {
      if (extra.evaluate(std::span<const Rational>(current.exact)) > 0) return current;
      return solve_exact(extra);
    }
    const double scale = row_scale(extra);
    if (extra.evaluate(std::span<const double>(current.point)) / scale > options.epsilon) return current;

    std::vector<std::vector<double>> rows;
    std::vector<double> consts;
    for (const auto* f : all_rows(extra)) {
      const double s = row_scale(*f);
      std::vector<double> r(dim);
      for (std::size_t j = 0; j < dim; ++j) r[j] = to_double(f->coefficients[j]) / s;
      rows.push_back(std::move(r));
      consts.push_back(to_double(f->constant) / s);
    }
    auto sol = max_margin(rows, consts, lo, hi);
    if (sol.margin > options.epsilon) return Witness{std::move(sol.point), {}};
    if (sol.margin < -options.epsilon) return std::nullopt;
    if (!options.verify_exact)
      throw SolverTolerance("feasibility margin " + std::to_string(sol.margin) + " within tolerance");
    return solve_exact(extra);
  }

  std::optional<Witness> solve_exact(const AffineFunction& extra) {
    std::vector<std::vector<Rational>> rows;
    std::vector<Rational> consts;
    for (const auto* f : all_rows(extra)) {
      rows.push_back(f->coefficients);
      consts.push_back(f->constant);
    }
    auto sol = max_margin(rows, consts, box.lo, box.hi);
    if (!(sol.margin > 0)) return std::nullopt;
    Witness w;
    for (const auto& v : sol.point) w.point.push_back(to_double(v));
    w.exact = std::move(sol.point);
    return w;
  }

  std::vector<const AffineFunction*> all_rows(const AffineFunction& extra) const {
    std::vector<const AffineFunction*> rows;
    for (const auto& c : constraints) rows.push_back(&c);
    rows.push_back(&extra);
    return rows;
  }

  static double row_scale(const AffineFunction& f) {
    double s = 0;
    for (const auto& v : f.coefficients) s = std::max(s, std::abs(to_double(v)));
    return s > 0 ? s : 1.0;
  }

  void visit(std::size_t pos, std::vector<AffineFunction>& aff, std::vector<Activation>& bits,
             const Witness& witness) {
    while (pos < order.size() && net.kind(order[pos]) != NeuronKind::Relu) {
      const std::size_t i = order[pos];
      if (net.kind(i) != NeuronKind::Input) aff[i] = preactivation(net, i, aff);
      ++pos;
    }
    if (pos == order.size()) {
      found.push_back({ActivationPattern{bits, false}, witness.point, witness.exact});
      return;
    }
    const std::size_t i = order[pos];
    const std::size_t slot = net.relu_slot(i);
    AffineFunction pre = preactivation(net, i, aff);
    if (pre.is_constant()) {
      const bool on = pre.constant > 0;
      bits[slot] = on ? Activation::Active : Activation::Inactive;
      aff[i] = on ? pre : AffineFunction::zero(net.input_dim());
      visit(pos + 1, aff, bits, witness);
      return;
    }
    AffineFunction neg = pre;
    for (auto& v : neg.coefficients) v = -v;
    neg.constant = -neg.constant;
    for (const bool on : {true, false}) {
      const AffineFunction& side = on ? pre : neg;
      auto w = feasible(side, witness);
      if (!w) continue;
      constraints.push_back(side);
      bits[slot] = on ? Activation::Active : Activation::Inactive;
      auto saved = aff[i];
      aff[i] = on ? pre : AffineFunction::zero(net.input_dim());
      visit(pos + 1, aff, bits, *w);
      aff[i] = std::move(saved);
      constraints.pop_back();
    }
  }
};

}  // namespace

std::vector<PatternWitness> carve_signvectors(const Network& net, const Box& box, const SignvectorOptions& options) {
  box.validate();
  if (box.dim() != net.input_dim()) throw DimensionMismatch("box dimension differs from input dimension");
  require_piecewise_linear(net);

  SignSearch search{net, box, options, layered_order(net), {}, {}, {}, {}};
  for (std::size_t j = 0; j < box.dim(); ++j) {
    search.lo.push_back(to_double(box.lo[j]));
    search.hi.push_back(to_double(box.hi[j]));
  }
  SignSearch::Witness start;
  for (std::size_t j = 0; j < box.dim(); ++j) {
    start.exact.push_back((box.lo[j] + box.hi[j]) / 2);
    start.point.push_back(to_double(start.exact.back()));
  }
  auto aff = initial_affines(net);
  std::vector<Activation> bits(net.relu_neurons().size(), Activation::Inactive);
  search.visit(0, aff, bits, start);
  auto found = std::move(search.found);
  std::sort(found.begin(), found.end(),
            [](const PatternWitness& a, const PatternWitness& b) { return a.pattern < b.pattern; });
  return found;
}

std::map<std::string, AffineFunction> region_function(const Network& net, const ActivationPattern& pattern) {
  require_piecewise_linear(net);
  if (pattern.size() != net.relu_neurons().size())
    throw DimensionMismatch("activation pattern length does not match relu count");
  auto aff = initial_affines(net);
  std::vector<AffineFunction> logits(net.size());
  for (std::size_t i : net.order()) {
    const auto kind = net.kind(i);
    if (kind == NeuronKind::Input) continue;
    AffineFunction pre = preactivation(net, i, aff);
    if (kind == NeuronKind::Relu) {
      aff[i] = pattern.active(net.relu_slot(i)) ? std::move(pre) : AffineFunction::zero(net.input_dim());
    } else if (kind == NeuronKind::Sigmoid) {
      logits[i] = std::move(pre);
    } else {
      aff[i] = std::move(pre);
    }
  }
  return output_functions(net, aff, logits);
}

std::vector<Polynomial<Rational>> neuron_polynomials(const Network& net, const ActivationPattern& pattern) {
  if (pattern.size() != net.relu_neurons().size())
    throw DimensionMismatch("activation pattern length does not match relu count");
  const std::size_t dim = net.input_dim();
  std::vector<Polynomial<Rational>> poly(net.size(), Polynomial<Rational>(dim));
  const auto& inputs = net.input_neurons();
  for (std::size_t k = 0; k < inputs.size(); ++k) poly[inputs[k]] = Polynomial<Rational>::variable(dim, k);
  for (std::size_t i : net.order()) {
    const auto kind = net.kind(i);
    if (kind == NeuronKind::Input) continue;
    const auto& in = net.inputs_of(i);
    if (kind == NeuronKind::Mul) {
      poly[i] = poly[in[0].source] * poly[in[1].source];
      continue;
    }
    auto pre = Polynomial<Rational>::constant(dim, net.bias(i));
    for (const auto& e : in) pre += poly[e.source] * e.weight;
    if (kind == NeuronKind::Relu && !pattern.active(net.relu_slot(i))) pre = Polynomial<Rational>(dim);
    poly[i] = std::move(pre);
  }
  return poly;
}

std::string_view decision_name(Decision d) {
  switch (d) {
    case Decision::Cat: return "Cat";
    case Decision::Dog: return "Dog";
    case Decision::Indecision: return "Indecision";
  }
  return "?";
}

DecisionPartition decision_partition(const std::vector<CarvedRegion>& regions, double t1, double t2,
                                     const std::string& output_id) {
  if (!(t2 > 0.0 && t2 < t1 && t1 < 1.0)) throw InvalidThresholds("thresholds must satisfy 0 < T2 < T1 < 1");
  const Rational upper = rational_from_double(std::log(t1 / (1.0 - t1)));
  const Rational lower = rational_from_double(std::log(t2 / (1.0 - t2)));
  DecisionPartition out;
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const auto& region = regions[r];
    const AffineFunction* logit = nullptr;
    if (output_id.empty()) {
      if (region.functions.size() != 1) throw DimensionMismatch("decision partition needs a single output");
      logit = &region.functions.begin()->second;
    } else {
      auto it = region.functions.find(output_id);
      if (it == region.functions.end()) throw DanglingReference("no output '" + output_id + "'");
      logit = &it->second;
    }
    if (logit->coefficients.size() != 2) throw DimensionMismatch("decision partition is 2-D");
    const auto& a = logit->coefficients;
    auto cat_split = split_polygon(region.polygon, a[0], a[1], logit->constant - upper);
    if (!cat_split.positive.empty()) out.pieces.push_back({r, Decision::Cat, std::move(cat_split.positive)});
    if (cat_split.negative.empty()) continue;
    auto dog_split = split_polygon(cat_split.negative, a[0], a[1], logit->constant - lower);
    if (!dog_split.positive.empty()) out.pieces.push_back({r, Decision::Indecision, std::move(dog_split.positive)});
    if (!dog_split.negative.empty()) out.pieces.push_back({r, Decision::Dog, std::move(dog_split.negative)});
  }
  return out;
}

std::map<std::string, unsigned> polynomial_degree(const Network& net) {
  std::vector<unsigned> deg(net.size(), 0);
  for (std::size_t i : net.order()) {
    const auto& in = net.inputs_of(i);
    switch (net.kind(i)) {
      case NeuronKind::Input: deg[i] = 1; break;
      case NeuronKind::Mul: deg[i] = deg[in[0].source] + deg[in[1].source]; break;
      default:
        for (const auto& e : in) deg[i] = std::max(deg[i], deg[e.source]);
        break;
    }
  }
  std::map<std::string, unsigned> out;
  for (std::size_t i = 0; i < net.size(); ++i) out.emplace(net.neuron(i).id, deg[i]);
  return out;
}

std::vector<PolynomialCell> carve_polynomial(const Network& net, const Box& box, const PolynomialCarveOptions& options) {
  if (net.input_dim() != 2 || box.dim() != 2) throw DimensionMismatch("polynomial carving is 2-D");
  box.validate();
  if (options.grid < 2) throw ResolutionTooCoarse("grid needs at least 2 samples per axis");
  const std::size_t g = options.grid;
  const double x0 = to_double(box.lo[0]), x1 = to_double(box.hi[0]);
  const double y0 = to_double(box.lo[1]), y1 = to_double(box.hi[1]);
  auto coord = [&](std::size_t i, double lo, double hi) { return lo + (static_cast<double>(i) + 0.5) * (hi - lo) / g; };

  std::map<ActivationPattern, PolynomialCell> cells;
  std::vector<ActivationPattern> labels(g * g);
  std::vector<char> on_boundary(g * g, 0);
  for (std::size_t j = 0; j < g; ++j) {
    for (std::size_t i = 0; i < g; ++i) {
      const double p[2] = {coord(i, x0, x1), coord(j, y0, y1)};
      auto pat = activation_pattern(net, p);
      on_boundary[j * g + i] = pat.boundary;
      pat.boundary = false;
      if (!on_boundary[j * g + i]) {
        auto& cell = cells[pat];
        cell.samples.push_back({p[0], p[1]});
      }
      labels[j * g + i] = std::move(pat);
    }
  }

  // Bisect between disagreeing neighbours to catch cells thinner than a step.
  std::set<ActivationPattern> refined_only;
  auto refine = [&](auto&& self, std::array<double, 2> a, std::array<double, 2> b, const ActivationPattern& pa,
                    const ActivationPattern& pb, std::size_t depth) -> void {
    if (depth == 0) return;
    const std::array<double, 2> m{(a[0] + b[0]) / 2, (a[1] + b[1]) / 2};
    auto pm = activation_pattern(net, m);
    if (pm.boundary) return;
    if (pm != pa && pm != pb) {
      auto [it, inserted] = cells.try_emplace(pm);
      if (inserted) refined_only.insert(pm);
      it->second.samples.push_back(m);
      self(self, a, m, pa, pm, depth - 1);
      self(self, m, b, pm, pb, depth - 1);
    } else if (pm == pa) {
      self(self, m, b, pm, pb, depth - 1);
    } else {
      self(self, a, m, pa, pm, depth - 1);
    }
  };
  for (std::size_t j = 0; j < g; ++j) {
    for (std::size_t i = 0; i < g; ++i) {
      const std::size_t k = j * g + i;
      if (on_boundary[k]) continue;
      const std::array<double, 2> p{coord(i, x0, x1), coord(j, y0, y1)};
      if (i + 1 < g && !on_boundary[k + 1] && labels[k] != labels[k + 1])
        refine(refine, p, {coord(i + 1, x0, x1), p[1]}, labels[k], labels[k + 1], options.refine_depth);
      if (j + 1 < g && !on_boundary[k + g] && labels[k] != labels[k + g])
        refine(refine, p, {p[0], coord(j + 1, y0, y1)}, labels[k], labels[k + g], options.refine_depth);
    }
  }
  if (options.strict && !refined_only.empty())
    throw ResolutionTooCoarse(std::to_string(refined_only.size()) +
                              " cell(s) are thinner than one grid step; increase the grid");

  std::vector<PolynomialCell> out;
  out.reserve(cells.size());
  for (auto& [pattern, cell] : cells) {
    cell.pattern = pattern;
    cell.grid_witnessed = !refined_only.count(pattern);
    const auto polys = neuron_polynomials(net, pattern);
    for (std::size_t i = 0; i < net.size(); ++i)
      if (net.kind(i) != NeuronKind::Input) cell.functions.emplace(net.neuron(i).id, polys[i]);
    out.push_back(std::move(cell));
  }
  return out;
}

std::vector<Polyline> trace_level_set(const std::function<double(double, double)>& value,
                                      const std::function<bool(double, double)>& inside, const Box& box, double c,
                                      std::size_t grid) {
  if (box.dim() != 2) throw DimensionMismatch("level sets are traced in 2-D");
  box.validate();
  if (grid < 2) throw ResolutionTooCoarse("grid needs at least 2 squares per axis");
  const std::size_t g = grid;
  const std::size_t stride = g + 1;
  const double x0 = to_double(box.lo[0]), x1 = to_double(box.hi[0]);
  const double y0 = to_double(box.lo[1]), y1 = to_double(box.hi[1]);
  auto px = [&](std::size_t i) { return x0 + (x1 - x0) * static_cast<double>(i) / g; };
  auto py = [&](std::size_t j) { return y0 + (y1 - y0) * static_cast<double>(j) / g; };

  std::vector<double> f(stride * stride);
  std::vector<char> in(stride * stride);
  for (std::size_t j = 0; j <= g; ++j)
    for (std::size_t i = 0; i <= g; ++i) {
      f[j * stride + i] = value(px(i), py(j)) - c;
      in[j * stride + i] = inside(px(i), py(j));
    }
  auto above = [&](std::size_t i, std::size_t j) { return f[j * stride + i] >= 0.0; };

  // Edge ids: horizontal edge from node (i,j) is 2*node, vertical is 2*node+1.
  std::unordered_map<std::uint64_t, std::array<double, 2>> points;
  auto crossing = [&](std::uint64_t id) -> std::uint64_t {
    if (points.count(id)) return id;
    const std::size_t node = id / 2;
    const std::size_t i = node % stride, j = node / stride;
    std::array<double, 2> a{px(i), py(j)};
    std::array<double, 2> b = (id % 2 == 0) ? std::array<double, 2>{px(i + 1), py(j)}
                                            : std::array<double, 2>{px(i), py(j + 1)};
    double fa = value(a[0], a[1]) - c;
    for (int it = 0; it < 80; ++it) {
      const std::array<double, 2> m{(a[0] + b[0]) / 2, (a[1] + b[1]) / 2};
      if (m == a || m == b) break;
      const double fm = value(m[0], m[1]) - c;
      if (fm == 0.0) {
        a = b = m;
        break;
      }
      if ((fm >= 0.0) == (fa >= 0.0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    const double fa_end = value(a[0], a[1]) - c, fb_end = value(b[0], b[1]) - c;
    points[id] = std::abs(fa_end) <= std::abs(fb_end) ? a : b;
    return id;
  };

  std::map<std::uint64_t, std::vector<std::uint64_t>> adjacency;
  auto link = [&](std::uint64_t a, std::uint64_t b) {
    crossing(a);
    crossing(b);
    adjacency[a].push_back(b);
    adjacency[b].push_back(a);
  };

  for (std::size_t j = 0; j < g; ++j) {
    for (std::size_t i = 0; i < g; ++i) {
      const std::size_t n0 = j * stride + i, n1 = n0 + 1, n2 = n0 + stride + 1, n3 = n0 + stride;
      if (!in[n0] || !in[n1] || !in[n2] || !in[n3]) continue;
      const bool s0 = above(i, j), s1 = above(i + 1, j), s2 = above(i + 1, j + 1), s3 = above(i, j + 1);
      const std::uint64_t bottom = 2 * n0, right = 2 * n1 + 1, top = 2 * n3, left = 2 * n0 + 1;
      std::vector<std::uint64_t> cut;
      if (s0 != s1) cut.push_back(bottom);
      if (s1 != s2) cut.push_back(right);
      if (s3 != s2) cut.push_back(top);
      if (s0 != s3) cut.push_back(left);
      if (cut.size() == 2) {
        link(cut[0], cut[1]);
      } else if (cut.size() == 4) {
        const double xm = (px(i) + px(i + 1)) / 2, ym = (py(j) + py(j + 1)) / 2;
        const bool centre = value(xm, ym) - c >= 0.0;
        if (centre == s0) {
          link(bottom, right);
          link(top, left);
        } else {
          link(left, bottom);
          link(right, top);
        }
      }
    }
  }

  std::vector<Polyline> lines;
  std::set<std::uint64_t> used;
  auto walk = [&](std::uint64_t start) {
    Polyline line;
    std::uint64_t prev = start, cur = start;
    line.push_back(points[cur]);
    used.insert(cur);
    while (true) {
      std::uint64_t next = cur;
      for (auto nb : adjacency[cur])
        if (nb != prev && !used.count(nb)) {
          next = nb;
          break;
        }
      if (next == cur) {
        // Close loops back onto the start.
        for (auto nb : adjacency[cur])
          if (nb == start && line.size() > 2) line.push_back(points[start]);
        break;
      }
      prev = cur;
      cur = next;
      used.insert(cur);
      line.push_back(points[cur]);
    }
    lines.push_back(std::move(line));
  };
  for (const auto& [id, nbs] : adjacency)
    if (nbs.size() == 1 && !used.count(id)) walk(id);
  for (const auto& [id, nbs] : adjacency)
    if (!used.count(id)) walk(id);
  return lines;
}

std::vector<Polyline> trace_level_set(const Network& net, const std::string& neuron, const ActivationPattern& pattern,
                                      double c, const Box& box, std::size_t grid) {
  if (net.input_dim() != 2) throw DimensionMismatch("level sets are traced in 2-D");
  const std::size_t idx = net.index_of(neuron);
  const auto poly = neuron_polynomials(net, pattern)[idx];
  auto value = [&](double x, double y) {
    const double p[2] = {x, y};
    return poly.evaluate_with<double>(std::span<const double>(p, 2), [](const Rational& r) { return to_double(r); });
  };
  auto inside = [&](double x, double y) {
    const double p[2] = {x, y};
    return activation_pattern(net, p) == pattern;
  };
  return trace_level_set(value, inside, box, c, grid);
}

Network build_folding_network(std::size_t n, std::size_t d, std::size_t layers) {
  if (d == 0 || n == 0 || n % d != 0) throw DivisibilityError("d must divide n");
  if (layers < 2) throw DivisibilityError("the folding construction needs at least 2 layers");
  const std::size_t p = n / d;

  // Sawtooth coefficients: s(z) = a_0 - 2 a_1 + 2 a_2 - ... with a_m = relu(p z - m).
  std::vector<Rational> saw(p);
  for (std::size_t m = 0; m < p; ++m) saw[m] = m == 0 ? Rational(1) : Rational(m % 2 == 1 ? -2 : 2);

  std::vector<NeuronDecl> decls;
  auto xid = [](std::size_t j) { return "x" + std::to_string(j); };
  auto fid = [](std::size_t l, std::size_t j, std::size_t m) {
    return "f" + std::to_string(l) + "_" + std::to_string(j) + "_" + std::to_string(m);
  };
  for (std::size_t j = 0; j < d; ++j) decls.push_back({xid(j), NeuronKind::Input, {}, 0});

  // Weighted edges realising "coefficient * z_j" from the previous layer.
  auto folded = [&](std::size_t l, std::size_t j, const Rational& scale) {
    std::vector<Edge> edges;
    if (l == 1) {
      edges.push_back({xid(j), scale});
    } else {
      for (std::size_t m = 0; m < p; ++m) edges.push_back({fid(l - 1, j, m), scale * saw[m]});
    }
    return edges;
  };

  for (std::size_t l = 1; l < layers; ++l)
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t m = 0; m < p; ++m)
        decls.push_back({fid(l, j, m), NeuronKind::Relu, folded(l, j, Rational(static_cast<long>(p))),
                         Rational(-static_cast<long>(m))});

  // Final layer: n hyperplanes v_k . (z - 1/2) = eps_k. The normals lie on the
  // moment curve; eps_k has degree d in k, so no d+1 of them share a point
  // (an affine eps_k would make them concurrent).
  const Rational half(1, 2);
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<Rational> normal(d);
    const Rational s = Rational(static_cast<long>(2 * k) - static_cast<long>(n - 1), 2);
    Rational power = 1;
    for (std::size_t j = 0; j < d; ++j) {
      normal[j] = power;
      power *= s;
    }
    Rational offset;
    if (d == 1) {
      // Breakpoints at (2k+1)/(2n).
      offset = -Rational(static_cast<long>(2 * k + 1), static_cast<long>(2 * n));
    } else {
      Rational eps(1, 4);
      for (std::size_t j = 0; j < d; ++j) eps *= Rational(static_cast<long>(k + 1), static_cast<long>(4 * n));
      offset = -eps;
      for (std::size_t j = 0; j < d; ++j) offset -= normal[j] * half;
    }
    NeuronDecl g{"g" + std::to_string(k), NeuronKind::Relu, {}, offset};
    for (std::size_t j = 0; j < d; ++j)
      for (auto& e : folded(layers, j, normal[j])) g.incoming.push_back(std::move(e));
    decls.push_back(std::move(g));
  }
  NeuronDecl y{"y", NeuronKind::Linear, {}, 0};
  for (std::size_t k = 0; k < n; ++k) y.incoming.push_back({"g" + std::to_string(k), Rational(1)});
  decls.push_back(std::move(y));
  return Network(std::move(decls), d, "folding");
}

Network embed_strip(const Network& net) {
  if (net.input_dim() != 1) throw DimensionMismatch("strip embedding expects a 1-D network");
  std::vector<NeuronDecl> decls;
  bool inserted = false;
  std::string dummy = "strip_dummy";
  while (net.find(dummy)) dummy += "_";
  for (const auto& d : net.neurons()) {
    decls.push_back(d);
    if (d.kind == NeuronKind::Input && !inserted) {
      decls.push_back({dummy, NeuronKind::Input, {}, 0});
      inserted = true;
    }
  }
  return Network(std::move(decls), 2, net.name(), net.seed());
}

}  // namespace carvelab
