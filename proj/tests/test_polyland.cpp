#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "carvelab/csv.hpp"
#include "carvelab/error.hpp"
#include "carvelab/polyland.hpp"
#include "oracles.hpp"

using namespace carvelab;

namespace {

// Five inputs, three relu hidden neurons, one linear output.
Network five_three_one(Rng& rng) {
  std::vector<NeuronDecl> d;
  for (int i = 1; i <= 5; ++i) d.push_back({"x" + std::to_string(i), NeuronKind::Input, {}, 0});
  NeuronDecl y{"y", NeuronKind::Linear, {}, Rational(1, 4)};
  for (int k = 1; k <= 3; ++k) {
    NeuronDecl h{"h" + std::to_string(k), NeuronKind::Relu, {}, Rational(static_cast<long>(rng() % 9), 7)};
    for (int i = 1; i <= 5; ++i) h.incoming.push_back({"x" + std::to_string(i), Rational(static_cast<long>(rng() % 9) + 1, 5)});
    d.push_back(h);
    y.incoming.push_back({h.id, Rational(static_cast<long>(rng() % 9) - 4, 3)});
  }
  d.push_back(y);
  return Network(std::move(d), 5, "five-three-one");
}

Network random_net(Rng& rng, NeuronKind out_kind, std::size_t hidden = 4) {
  std::vector<NeuronDecl> d{{"x0", NeuronKind::Input, {}, 0}, {"x1", NeuronKind::Input, {}, 0}};
  std::normal_distribution<double> g;
  auto r = [&] { return rational_from_double(std::round(g(rng) * 64) / 64); };
  NeuronDecl y{"y", out_kind, {}, r()};
  for (std::size_t k = 0; k < hidden; ++k) {
    NeuronDecl h{"h" + std::to_string(k), NeuronKind::Relu, {}, r()};
    h.incoming = {{"x0", r()}, {"x1", r()}};
    d.push_back(h);
    y.incoming.push_back({h.id, r()});
  }
  d.push_back(y);
  return Network(std::move(d), 2);
}

Batch random_batch(Rng& rng, std::size_t n, bool binary) {
  std::normal_distribution<double> g;
  Batch b;
  for (std::size_t i = 0; i < n; ++i) b.push_back({{g(rng), g(rng)}, binary ? static_cast<double>(rng() % 2) : g(rng)});
  return b;
}

// Worst relative error between the analytic gradient and central differences.
double gradient_error(const LossWithGradient& f, const std::vector<double>& theta) {
  const auto lr = f(theta);
  double worst = 0;
  const double h = 1e-5;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    auto tp = theta, tm = theta;
    tp[k] += h;
    tm[k] -= h;
    const double fd = (f(tp).value - f(tm).value) / (2 * h);
    worst = std::max(worst, std::abs(fd - lr.gradient[k]) / std::max(1.0, std::abs(fd)));
  }
  return worst;
}

}  // namespace

TEST_CASE("parameter layout") {
  Rng rng(1, 0);
  const Network net = five_three_one(rng);
  const auto layout = parameter_layout(net);
  CHECK(layout.size() == 3 * 6 + 4);
  CHECK(layout.front().name == "w:x1->h1");
  CHECK(layout[5].name == "b:h1");
  CHECK(layout.back().name == "b:y");
  const auto theta = parameters_of(net);
  CHECK(parameters_of(with_parameters(net, theta)) == theta);
}

TEST_CASE("graph-induced polynomial") {
  Rng rng(2, 0);
  const Network net = five_three_one(rng);
  const std::vector<double> x{1, 2, 3, 4, 5};
  const auto pattern = activation_pattern(net, x);
  REQUIRE(pattern.str() == "AAA");
  const auto p = parameter_polynomial(net, x, pattern);
  CHECK(p.degree() == 2);
  // 15 input paths and 4 bias paths.
  CHECK(p.size() == 19);
  const auto layout = parameter_layout(net);
  auto index = [&](const std::string& name) {
    for (std::size_t k = 0; k < layout.size(); ++k)
      if (layout[k].name == name) return k;
    FAIL("missing parameter " << name);
    return std::size_t{0};
  };
  MultiIndex m(layout.size(), 0);
  m[index("w:x3->h1")] = 1;
  m[index("w:h1->y")] = 1;
  CHECK(p.coefficient(m) == 3.0);
  std::size_t bias_terms = 0;
  for (const auto& [alpha, c] : p.terms()) {
    bool has_bias = false;
    for (std::size_t k = 0; k < alpha.size(); ++k) has_bias |= alpha[k] > 0 && layout[k].name[0] == 'b';
    bias_terms += has_bias;
  }
  CHECK(bias_terms == 4);

  // With the pattern held fixed, the polynomial reproduces forward.
  std::normal_distribution<double> g;
  for (int t = 0; t < 100; ++t) {
    auto theta = parameters_of(net);
    for (auto& v : theta) v += 0.05 * g(rng);
    const Network moved = with_parameters(net, theta);
    if (activation_pattern(moved, x) != pattern) continue;
    const double f = forward(moved, x)[moved.index_of("y")];
    CHECK(p.evaluate(theta) == doctest::Approx(f).epsilon(1e-10));
  }
  CHECK_THROWS_AS(parameter_polynomial(net, x, ActivationPattern::from_string("AIA")), PatternUnrealizable);
}

TEST_CASE("l2 gradient") {
  // y = w x at x = 2, G = 0, w = 1: dL/dw = 2 * (2) * 2 = 8.
  const Network line = parse_network(R"({"input_dim":1,"neurons":[{"id":"x","kind":"input"},
      {"id":"y","kind":"linear","in":[["x","1"]]}]})");
  const Batch one{{{2.0}, 0.0}};
  const auto r = loss_l2(line, one, parameters_of(line));
  CHECK(r.value == 4.0);
  CHECK(r.gradient[0] == 8.0);
  CHECK(r.gradient[1] == 4.0);

  Rng rng(3, 0);
  for (int t = 0; t < 10; ++t) {
    const Network net = random_net(rng, NeuronKind::Linear);
    const Batch batch = random_batch(rng, 8, false);
    auto f = [&](std::span<const double> th) { return loss_l2(net, batch, th); };
    CHECK(gradient_error(f, parameters_of(net)) <= 1e-6);
  }

  // Targets equal to the outputs: the gradient vanishes.
  const Network net = random_net(rng, NeuronKind::Linear);
  Batch exact = random_batch(rng, 6, false);
  for (auto& s : exact) s.target = forward(net, s.x)[net.index_of("y")];
  for (double v : loss_l2(net, exact, parameters_of(net)).gradient) CHECK(v == 0.0);
}

TEST_CASE("cross-entropy gradient") {
  // f = 0 with G = 1 and df/dw = 2: gradient (1/2 - 1) * 2 = -1.
  const Network line = parse_network(R"({"input_dim":1,"neurons":[{"id":"x","kind":"input"},
      {"id":"y","kind":"sigmoid","in":[["x","0"]]}]})");
  const Batch one{{{2.0}, 1.0}};
  CHECK(loss_xent(line, one, parameters_of(line)).gradient[0] == -1.0);

  Rng rng(4, 0);
  for (int t = 0; t < 10; ++t) {
    const Network net = random_net(rng, NeuronKind::Sigmoid);
    const Batch batch = random_batch(rng, 8, true);
    auto f = [&](std::span<const double> th) { return loss_xent(net, batch, th); };
    CHECK(gradient_error(f, parameters_of(net)) <= 1e-6);
  }
  const Batch bad{{{1.0}, 0.5}};
  CHECK_THROWS_AS(loss_xent(line, bad, parameters_of(line)), PreconditionViolation);
}

TEST_CASE("symbolic and finite-difference Hessians agree") {
  Rng rng(5, 0);
  std::normal_distribution<double> g;
  for (int t = 0; t < 10; ++t) {
    Polynomial<double> p(3);
    for (int k = 0; k < 8; ++k) {
      MultiIndex a(3);
      for (auto& e : a) e = static_cast<std::uint32_t>(rng() % 3);
      if (total_degree(a) <= 3) p.add_term(a, g(rng));
    }
    const std::vector<double> at{g(rng), g(rng), g(rng)};
    const auto hs = hessian(p, at);
    const auto hf = hessian_fd([&](std::span<const double> x) { return p.evaluate(x); }, at);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(hs(i, j) - hf(i, j)) <= 1e-5);
  }
  // a * theta^2 has the constant Hessian 2a.
  Polynomial<double> q(1);
  q.add_term({2}, 3.5);
  CHECK(hessian(q, std::vector<double>{-7.0})(0, 0) == 7.0);
}

TEST_CASE("loss Hessian modes") {
  Rng rng(6, 0);
  const Network net = random_net(rng, NeuronKind::Linear, 2);
  const Batch batch = random_batch(rng, 5, false);
  const auto theta = parameters_of(net);
  const auto s = loss_hessian(LossKind::L2, net, batch, theta, HessianMode::Symbolic);
  const auto f = loss_hessian(LossKind::L2, net, batch, theta, HessianMode::FiniteDifference);
  CHECK_FALSE(f.boundary);
  for (std::size_t i = 0; i < theta.size(); ++i)
    for (std::size_t j = 0; j < theta.size(); ++j) CHECK(std::abs(s.matrix(i, j) - f.matrix(i, j)) <= 1e-5);
  CHECK_THROWS_AS(loss_hessian(LossKind::CrossEntropy, net, batch, theta, HessianMode::Symbolic),
                  PreconditionViolation);
}

TEST_CASE("interpolation curves") {
  const LossFunction bowl = [](std::span<const double> t) {
    double s = 0;
    for (double v : t) s += v * v;
    return s;
  };
  const std::vector<double> a{1, 2}, zero{0, 0};
  const auto flat = interpolation_curve(bowl, a, a, 11);
  for (const auto& p : flat) CHECK(p.loss == 5.0);
  const auto down = interpolation_curve(bowl, a, zero, 21);
  CHECK(down.front().alpha == 0.0);
  CHECK(down.back().alpha == 1.0);
  for (std::size_t k = 1; k < down.size(); ++k) CHECK(down[k].loss < down[k - 1].loss);
  CHECK(max_interior_bump(down) == 0.0);
  CHECK_THROWS_AS(interpolation_curve(bowl, a, zero, 1), PreconditionViolation);
}

TEST_CASE("plane sections") {
  const std::vector<double> c{0.5, -1, 2};
  const LossFunction bowl = [&](std::span<const double> t) {
    double s = 0;
    for (std::size_t k = 0; k < t.size(); ++k) s += (k + 1.0) * (t[k] - c[k]) * (t[k] - c[k]);
    return s;
  };
  Rng rng(7, 0);
  const auto one = plane_section(bowl, c, 1, 1.0, rng);
  REQUIRE(one.values.size() == 1);
  CHECK(one.values[0] == 0.0);
  const auto s = plane_section(bowl, c, 9, 1.5, rng);
  CHECK(std::abs(dot(s.u, s.v)) <= 1e-12);
  CHECK(norm(s.u) == doctest::Approx(1.0));
  for (std::size_t r = 0; r < 9; ++r)
    for (std::size_t q = 0; q < 9; ++q) CHECK(std::abs(s.values[r * 9 + q] - s.values[(8 - r) * 9 + (8 - q)]) <= 1e-9);
  CHECK(s.values[4 * 9 + 4] == 0.0);

  // CSV round trip is bit exact.
  std::vector<std::vector<std::string>> rows;
  for (double v : s.values) rows.push_back({format_double(v)});
  const auto parsed = parse_csv(csv_document("plane", {"loss"}, rows));
  for (std::size_t k = 0; k < s.values.size(); ++k) CHECK(std::strtod(parsed[k + 1][0].c_str(), nullptr) == s.values[k]);
}

TEST_CASE("subspace descent") {
  // 10-D quadratic whose curvature lives in a 3-D subspace; a random
  // subspace of dimension >= 3 reaches the minimum.
  const std::size_t dim = 10;
  Rng rng(8, 0);
  std::normal_distribution<double> g;
  std::vector<std::vector<double>> a(3, std::vector<double>(dim));
  for (auto& row : a)
    for (auto& v : row) v = g(rng);
  gram_schmidt(a);
  const LossWithGradient loss = [&](std::span<const double> t) {
    LossResult r;
    r.gradient.assign(dim, 0.0);
    for (std::size_t k = 0; k < 3; ++k) {
      const double p = dot(a[k], t) - 1.0;
      r.value += p * p;
      for (std::size_t j = 0; j < dim; ++j) r.gradient[j] += 2 * p * a[k][j];
    }
    return r;
  };
  const std::vector<double> theta0(dim, 0.0);
  for (std::size_t dsub = 1; dsub <= dim; ++dsub) {
    Rng sub(9, dsub);
    const auto r = subspace_descent(loss, theta0, dsub, 3000, 0.2, sub);
    // At exactly 3 the projected problem can be badly conditioned, so only
    // progress is required there.
    if (dsub > 3)
      CHECK(r.final_loss <= 1e-6);
    else if (dsub == 3)
      CHECK(r.final_loss < loss(theta0).value);
    else
      CHECK(r.final_loss > 1e-6);
  }
  Rng z(1, 1);
  CHECK_THROWS_AS(subspace_descent(loss, theta0, 0, 10, 0.1, z), PreconditionViolation);

  // Full dimension follows the plain descent path.
  Rng full(2, 2);
  const auto r = subspace_descent(loss, theta0, dim, 50, 0.1, full);
  const auto plain = sgd(loss, theta0, 50, 0.1);
  CHECK(std::abs(r.final_loss - loss(plain).value) <= 1e-9);
}

TEST_CASE("critical points of small polynomials") {
  Rng rng(10, 0);
  Polynomial<double> bowl(2), saddle(2), cubic(2);
  bowl.add_term({2, 0}, 1);
  bowl.add_term({0, 2}, 1);
  saddle.add_term({2, 0}, 1);
  saddle.add_term({0, 2}, -1);
  cubic.add_term({3, 0}, 2);
  cubic.add_term({0, 3}, 1);
  cubic.add_term({1, 1}, -1);

  const auto b = find_critical_points(bowl, rng);
  REQUIRE(b.points.size() == 1);
  CHECK(b.points[0].kind == CriticalClass::LocalMin);
  CHECK(std::abs(b.points[0].point[0]) <= 1e-9);
  const auto s = find_critical_points(saddle, rng);
  REQUIRE(s.points.size() == 1);
  CHECK(s.points[0].kind == CriticalClass::Saddle);

  // Grid search plus Newton refinement as an independent oracle for the cubic.
  std::vector<std::array<double, 2>> oracle_points;
  for (int i = 0; i <= 120; ++i)
    for (int j = 0; j <= 120; ++j) {
      double x = -3 + 6.0 * i / 120, y = -3 + 6.0 * j / 120;
      for (int it = 0; it < 50; ++it) {
        const double gx = 6 * x * x - y, gy = 3 * y * y - x;
        const double a = 12 * x, bb = -1, d = 6 * y, det = a * d - bb * bb;
        if (std::abs(det) < 1e-14) break;
        x -= (d * gx - bb * gy) / det;
        y -= (a * gy - bb * gx) / det;
      }
      if (!(std::abs(6 * x * x - y) + std::abs(3 * y * y - x) <= 1e-12)) continue;
      bool dup = false;
      for (const auto& p : oracle_points) dup |= std::hypot(p[0] - x, p[1] - y) < 1e-6;
      if (!dup) oracle_points.push_back({x, y});
    }
  const auto c = find_critical_points(cubic, rng);
  CHECK(c.points.size() == oracle_points.size());
  for (const auto& p : oracle_points) {
    bool found = false;
    for (const auto& q : c.points) found |= std::hypot(q.point[0] - p[0], q.point[1] - p[1]) < 1e-6;
    CHECK(found);
  }
  bool origin_saddle = false;
  for (const auto& q : c.points)
    origin_saddle |= std::hypot(q.point[0], q.point[1]) < 1e-9 && q.kind == CriticalClass::Saddle;
  CHECK(origin_saddle);
}

TEST_CASE("compiled polynomial matches the map form") {
  Rng rng(11, 0);
  std::normal_distribution<double> g;
  Polynomial<double> p(3);
  for (int k = 0; k < 12; ++k) {
    MultiIndex a(3);
    for (auto& e : a) e = static_cast<std::uint32_t>(rng() % 4);
    p.add_term(a, g(rng));
  }
  const CompiledPolynomial cp(p);
  const std::vector<double> x{0.3, -1.2, 0.8};
  CHECK(cp.value(x) == doctest::Approx(p.evaluate(x)).epsilon(1e-12));
  std::vector<double> grad, hess;
  cp.gradient(x, grad);
  cp.hessian(x, hess);
  const auto h = hessian(p, x);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(grad[i] == doctest::Approx(p.derivative(i).evaluate(x)).epsilon(1e-12));
    for (std::size_t j = 0; j < 3; ++j) CHECK(hess[i * 3 + j] == doctest::Approx(h(i, j)).epsilon(1e-12));
  }
}

TEST_CASE("batch files") {
  const auto b = load_batch(std::string(CARVELAB_TEST_DATA) + "/xor.csv", 2);
  CHECK(b.size() == 6);
  CHECK(b[1].target == 1.0);
  CHECK_THROWS_AS(load_batch(std::string(CARVELAB_TEST_DATA) + "/xor.csv", 3), DimensionMismatch);
}
