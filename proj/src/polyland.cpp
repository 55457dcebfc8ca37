#include "carvelab/polyland.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "carvelab/error.hpp"
#include "carvelab/parallel.hpp"

namespace carvelab {

namespace {

/// First parameter slot of each neuron (npos for inputs and mul neurons).
std::vector<std::size_t> parameter_offsets(const Network& net, std::size_t* total = nullptr) {
  std::vector<std::size_t> base(net.size(), Network::npos);
  std::size_t next = 0;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const auto kind = net.kind(i);
    if (kind == NeuronKind::Input || kind == NeuronKind::Mul) continue;
    base[i] = next;
    next += net.inputs_of(i).size() + 1;
  }
  if (total) *total = next;
  return base;
}

std::size_t single_output(const Network& net) {
  if (net.outputs().size() != 1) throw DimensionMismatch("landscape tools need exactly one output neuron");
  return net.outputs().front();
}

void check_theta(const Network& net, std::span<const double> theta) {
  std::size_t total = 0;
  parameter_offsets(net, &total);
  if (theta.size() != total)
    throw DimensionMismatch("parameter vector has " + std::to_string(theta.size()) + " entries, network has " +
                            std::to_string(total));
}

double sigmoid(double f) {
  if (f >= 0.0) return 1.0 / (1.0 + std::exp(-f));
  const double e = std::exp(f);
  return e / (1.0 + e);
}

double softplus(double f) { return std::max(f, 0.0) + std::log1p(std::exp(-std::abs(f))); }

}  // namespace

std::vector<ParameterInfo> parameter_layout(const Network& net) {
  std::vector<ParameterInfo> out;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const auto kind = net.kind(i);
    if (kind == NeuronKind::Input || kind == NeuronKind::Mul) continue;
    const auto& in = net.inputs_of(i);
    for (std::size_t k = 0; k < in.size(); ++k)
      out.push_back({"w:" + net.neuron(in[k].source).id + "->" + net.neuron(i).id, i, k});
    out.push_back({"b:" + net.neuron(i).id, i, Network::npos});
  }
  return out;
}

std::vector<double> parameters_of(const Network& net) {
  std::vector<double> theta;
  for (const auto& p : parameter_layout(net))
    theta.push_back(p.edge == Network::npos ? net.bias_d(p.neuron) : net.inputs_of(p.neuron)[p.edge].weight_d);
  return theta;
}

Network with_parameters(const Network& net, std::span<const double> theta) {
  check_theta(net, theta);
  auto decls = net.neurons();
  const auto layout = parameter_layout(net);
  for (std::size_t k = 0; k < layout.size(); ++k) {
    auto& d = decls[layout[k].neuron];
    if (layout[k].edge == Network::npos) d.bias = rational_from_double(theta[k]);
    else d.incoming[layout[k].edge].weight = rational_from_double(theta[k]);
  }
  return Network(std::move(decls), net.input_dim(), net.name(), net.seed());
}

Batch load_batch(const std::string& path, std::size_t input_dim) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open data file '" + path + "'");
  Batch batch;
  std::string line;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) numeric = false;
      row.push_back(v);
    }
    if (!numeric) {
      if (!header_allowed) throw ParseError("non-numeric data row in '" + path + "'");
      header_allowed = false;
      continue;
    }
    header_allowed = false;
    if (row.size() != input_dim + 1)
      throw DimensionMismatch("data row has " + std::to_string(row.size()) + " columns, expected " +
                              std::to_string(input_dim + 1));
    const double g = row.back();
    row.pop_back();
    batch.push_back({std::move(row), g});
  }
  if (batch.empty()) throw ParseError("data file '" + path + "' has no samples");
  return batch;
}

OutputGradient output_gradient(const Network& net, std::span<const double> theta, std::span<const double> x,
                               bool logit) {
  check_theta(net, theta);
  if (x.size() != net.input_dim()) throw DimensionMismatch("input length differs from input_dim");
  const auto base = parameter_offsets(net);
  const std::size_t out = single_output(net);
  std::vector<double> pre(net.size(), 0.0), val(net.size(), 0.0);
  const auto& inputs = net.input_neurons();
  for (std::size_t k = 0; k < inputs.size(); ++k) val[inputs[k]] = x[k];
  for (std::size_t i : net.order()) {
    const auto kind = net.kind(i);
    if (kind == NeuronKind::Input) continue;
    const auto& in = net.inputs_of(i);
    if (kind == NeuronKind::Mul) {
      val[i] = val[in[0].source] * val[in[1].source];
      continue;
    }
    double z = theta[base[i] + in.size()];
    for (std::size_t k = 0; k < in.size(); ++k) z += theta[base[i] + k] * val[in[k].source];
    pre[i] = z;
    switch (kind) {
      case NeuronKind::Relu: val[i] = z > 0.0 ? z : 0.0; break;
      case NeuronKind::Sigmoid: val[i] = sigmoid(z); break;
      default: val[i] = z; break;
    }
  }

  const bool use_logit = logit && net.kind(out) == NeuronKind::Sigmoid;
  OutputGradient result;
  result.value = use_logit ? pre[out] : val[out];
  result.gradient.assign(theta.size(), 0.0);
  std::vector<double> dval(net.size(), 0.0);
  dval[out] = 1.0;
  const auto& order = net.order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::size_t i = *it;
    const auto kind = net.kind(i);
    if (kind == NeuronKind::Input || dval[i] == 0.0) continue;
    const auto& in = net.inputs_of(i);
    if (kind == NeuronKind::Mul) {
      dval[in[0].source] += dval[i] * val[in[1].source];
      dval[in[1].source] += dval[i] * val[in[0].source];
      continue;
    }
    double dpre = dval[i];
    if (kind == NeuronKind::Relu) dpre = pre[i] > 0.0 ? dpre : 0.0;
    if (kind == NeuronKind::Sigmoid && !(use_logit && i == out)) dpre *= val[i] * (1.0 - val[i]);
    if (dpre == 0.0) continue;
    for (std::size_t k = 0; k < in.size(); ++k) {
      result.gradient[base[i] + k] += dpre * val[in[k].source];
      dval[in[k].source] += dpre * theta[base[i] + k];
    }
    result.gradient[base[i] + in.size()] += dpre;
  }
  return result;
}

LossResult loss_l2(const Network& net, const Batch& batch, std::span<const double> theta) {
  if (batch.empty()) throw PreconditionViolation("batch is empty");
  LossResult r;
  r.gradient.assign(theta.size(), 0.0);
  for (const auto& s : batch) {
    const auto og = output_gradient(net, theta, s.x, false);
    const double residual = og.value - s.target;
    r.value += residual * residual;
    for (std::size_t k = 0; k < theta.size(); ++k) r.gradient[k] += 2.0 * residual * og.gradient[k];
  }
  const double scale = 1.0 / static_cast<double>(batch.size());
  r.value *= scale;
  for (auto& g : r.gradient) g *= scale;
  return r;
}

LossResult loss_xent(const Network& net, const Batch& batch, std::span<const double> theta) {
  if (batch.empty()) throw PreconditionViolation("batch is empty");
  LossResult r;
  r.gradient.assign(theta.size(), 0.0);
  for (const auto& s : batch) {
    if (s.target != 0.0 && s.target != 1.0) throw PreconditionViolation("cross-entropy targets must be 0 or 1");
    const auto og = output_gradient(net, theta, s.x, true);
    const double f = og.value;
    const double p = sigmoid(f);
    r.value += softplus(f) - s.target * f;
    const double factor = p - s.target;
    if (factor == 0.0) continue;
    for (std::size_t k = 0; k < theta.size(); ++k) r.gradient[k] += factor * og.gradient[k];
  }
  const double scale = 1.0 / static_cast<double>(batch.size());
  r.value *= scale;
  for (auto& g : r.gradient) g *= scale;
  return r;
}

LossResult evaluate_loss(LossKind kind, const Network& net, const Batch& batch, std::span<const double> theta) {
  return kind == LossKind::L2 ? loss_l2(net, batch, theta) : loss_xent(net, batch, theta);
}

namespace {

Polynomial<double> build_parameter_polynomial(const Network& net, std::span<const double> x,
                                              const ActivationPattern& pattern) {
  std::size_t nvars = 0;
  const auto base = parameter_offsets(net, &nvars);
  const std::size_t out = single_output(net);
  using P = Polynomial<double>;
  std::vector<P> poly(net.size(), P(nvars));
  const auto& inputs = net.input_neurons();
  for (std::size_t k = 0; k < inputs.size(); ++k) poly[inputs[k]] = P::constant(nvars, x[k]);
  for (std::size_t i : net.order()) {
    const auto kind = net.kind(i);
    if (kind == NeuronKind::Input) continue;
    const auto& in = net.inputs_of(i);
    if (kind == NeuronKind::Mul) {
      poly[i] = poly[in[0].source] * poly[in[1].source];
      continue;
    }
    if (kind == NeuronKind::Relu && !pattern.active(net.relu_slot(i))) continue;
    P pre = P::variable(nvars, base[i] + in.size());
    for (std::size_t k = 0; k < in.size(); ++k) pre += P::variable(nvars, base[i] + k) * poly[in[k].source];
    poly[i] = std::move(pre);
  }
  return poly[out];
}

}  // namespace

Polynomial<double> parameter_polynomial(const Network& net, std::span<const double> x,
                                        const ActivationPattern& pattern) {
  if (x.size() != net.input_dim()) throw DimensionMismatch("input length differs from input_dim");
  const auto realised = activation_pattern(net, x);
  if (realised.boundary || realised != pattern)
    throw PatternUnrealizable("pattern " + pattern.str() + " is not realised at the given input");
  return build_parameter_polynomial(net, x, pattern);
}

Polynomial<double> parameter_polynomial(const Network& net, std::span<const double> x) {
  return parameter_polynomial(net, x, activation_pattern(net, x));
}

Polynomial<double> l2_loss_polynomial(const Network& net, const Batch& batch) {
  if (batch.empty()) throw PreconditionViolation("batch is empty");
  std::size_t nvars = 0;
  parameter_offsets(net, &nvars);
  Polynomial<double> total(nvars);
  for (const auto& s : batch) {
    auto r = build_parameter_polynomial(net, s.x, activation_pattern(net, s.x)) -
             Polynomial<double>::constant(nvars, s.target);
    total += r * r;
  }
  return total * (1.0 / static_cast<double>(batch.size()));
}

CompiledPolynomial::CompiledPolynomial(const Polynomial<double>& p) : nvars_(p.nvars()), max_exp_(0) {
  for (const auto& [alpha, c] : p.terms()) {
    coeffs_.push_back(c);
    for (auto e : alpha) {
      exps_.push_back(e);
      max_exp_ = std::max(max_exp_, e);
    }
  }
}

void CompiledPolynomial::powers(std::span<const double> x, std::vector<double>& table) const {
  if (x.size() != nvars_) throw DimensionMismatch("evaluation point arity does not match polynomial");
  const std::size_t w = max_exp_ + 1;
  table.assign(nvars_ * w, 1.0);
  for (std::size_t k = 0; k < nvars_; ++k)
    for (std::size_t e = 1; e < w; ++e) table[k * w + e] = table[k * w + e - 1] * x[k];
}

double CompiledPolynomial::value(std::span<const double> x) const {
  std::vector<double> pw;
  powers(x, pw);
  const std::size_t w = max_exp_ + 1;
  double total = 0.0;
  for (std::size_t t = 0; t < coeffs_.size(); ++t) {
    double term = coeffs_[t];
    for (std::size_t k = 0; k < nvars_; ++k) term *= pw[k * w + exps_[t * nvars_ + k]];
    total += term;
  }
  return total;
}

void CompiledPolynomial::gradient(std::span<const double> x, std::vector<double>& out) const {
  std::vector<double> pw;
  powers(x, pw);
  const std::size_t w = max_exp_ + 1;
  out.assign(nvars_, 0.0);
  for (std::size_t t = 0; t < coeffs_.size(); ++t) {
    const std::uint32_t* e = &exps_[t * nvars_];
    for (std::size_t i = 0; i < nvars_; ++i) {
      if (e[i] == 0) continue;
      double term = coeffs_[t] * e[i] * pw[i * w + e[i] - 1];
      for (std::size_t k = 0; k < nvars_; ++k)
        if (k != i) term *= pw[k * w + e[k]];
      out[i] += term;
    }
  }
}

void CompiledPolynomial::hessian(std::span<const double> x, std::vector<double>& out) const {
  std::vector<double> pw;
  powers(x, pw);
  const std::size_t w = max_exp_ + 1;
  const std::size_t n = nvars_;
  out.assign(n * n, 0.0);
  std::vector<std::uint32_t> d(n);
  for (std::size_t t = 0; t < coeffs_.size(); ++t) {
    const std::uint32_t* e = &exps_[t * n];
    for (std::size_t i = 0; i < n; ++i) {
      if (e[i] == 0) continue;
      for (std::size_t j = i; j < n; ++j) {
        std::copy(e, e + n, d.begin());
        double factor = coeffs_[t] * d[i];
        --d[i];
        if (d[j] == 0) continue;
        factor *= d[j];
        --d[j];
        for (std::size_t k = 0; k < n; ++k) factor *= pw[k * w + d[k]];
        out[i * n + j] += factor;
        if (j != i) out[j * n + i] += factor;
      }
    }
  }
}

SymmetricMatrix hessian(const Polynomial<double>& p, std::span<const double> at) {
  CompiledPolynomial cp(p);
  std::vector<double> h;
  cp.hessian(at, h);
  SymmetricMatrix m(p.nvars());
  for (std::size_t i = 0; i < p.nvars(); ++i)
    for (std::size_t j = i; j < p.nvars(); ++j) m.set(i, j, h[i * p.nvars() + j]);
  return m;
}

SymmetricMatrix hessian_fd(const std::function<double(std::span<const double>)>& f, std::span<const double> at,
                           double h) {
  const std::size_t n = at.size();
  std::vector<double> x(at.begin(), at.end());
  auto eval = [&](std::size_t i, double di, std::size_t j, double dj) {
    x[i] += di;
    x[j] += dj;
    const double v = f(x);
    x[i] -= di;
    x[j] -= dj;
    return v;
  };
  const double f0 = f(x);
  SymmetricMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.set(i, i, (eval(i, h, i, 0.0) - 2.0 * f0 + eval(i, -h, i, 0.0)) / (h * h));
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = eval(i, h, j, h) - eval(i, h, j, -h) - eval(i, -h, j, h) + eval(i, -h, j, -h);
      m.set(i, j, v / (4.0 * h * h));
    }
  }
  return m;
}

HessianResult loss_hessian(LossKind kind, const Network& net, const Batch& batch, std::span<const double> theta,
                           HessianMode mode, double h) {
  const Network bound = with_parameters(net, theta);
  HessianResult result;
  if (mode == HessianMode::Symbolic) {
    if (kind != LossKind::L2) throw PreconditionViolation("symbolic Hessian is defined for the L2 loss only");
    result.matrix = hessian(l2_loss_polynomial(bound, batch), theta);
  } else {
    result.matrix =
        hessian_fd([&](std::span<const double> t) { return evaluate_loss(kind, net, batch, t).value; }, theta, h);
  }
  double theta_scale = 1.0;
  for (double t : theta) theta_scale = std::max(theta_scale, std::abs(t));
  for (const auto& s : batch) {
    const auto pre = preactivations(bound, s.x);
    const auto val = forward(bound, s.x);
    double value_scale = 1.0;
    for (double v : val) value_scale = std::max(value_scale, std::abs(v));
    for (std::size_t i : bound.relu_neurons())
      if (std::abs(pre[i]) <= 10.0 * h * theta_scale * value_scale) result.boundary = true;
  }
  return result;
}

std::vector<CurvePoint> interpolation_curve(const LossFunction& loss, std::span<const double> theta0,
                                            std::span<const double> thetaf, std::size_t steps) {
  if (steps < 2) throw PreconditionViolation("interpolation needs at least 2 steps");
  if (theta0.size() != thetaf.size()) throw DimensionMismatch("endpoints live in different parameter spaces");
  std::vector<CurvePoint> curve(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const double alpha = static_cast<double>(k) / static_cast<double>(steps - 1);
    curve[k].alpha = alpha;
    if (k == 0) {
      curve[k].loss = loss(theta0);
    } else if (k + 1 == steps) {
      curve[k].loss = loss(thetaf);
    } else {
      std::vector<double> t(theta0.size());
      for (std::size_t j = 0; j < t.size(); ++j) t[j] = (1.0 - alpha) * theta0[j] + alpha * thetaf[j];
      curve[k].loss = loss(t);
    }
  }
  return curve;
}

double max_interior_bump(const std::vector<CurvePoint>& curve) {
  if (curve.size() < 3) return 0.0;
  const double l0 = curve.front().loss, l1 = curve.back().loss;
  double bump = 0.0;
  for (std::size_t k = 1; k + 1 < curve.size(); ++k)
    bump = std::max(bump, curve[k].loss - ((1.0 - curve[k].alpha) * l0 + curve[k].alpha * l1));
  return bump;
}

namespace {

std::vector<std::vector<double>> random_orthonormal(std::size_t dim, std::size_t count, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> basis;
  while (basis.size() < count) {
    std::vector<double> v(dim);
    for (auto& x : v) x = normal(rng);
    auto trial = basis;
    trial.push_back(std::move(v));
    gram_schmidt(trial);
    basis = std::move(trial);
  }
  return basis;
}

}  // namespace

PlaneSection plane_section(const LossFunction& loss, std::span<const double> theta0, std::size_t grid, double extent,
                           Rng& rng) {
  if (grid < 1) throw PreconditionViolation("grid must be at least 1");
  if (theta0.size() < 2) throw PreconditionViolation("plane sections need at least 2 parameters");
  auto dirs = random_orthonormal(theta0.size(), 2, rng);
  PlaneSection s;
  s.grid = grid;
  s.extent = extent;
  s.u = std::move(dirs[0]);
  s.v = std::move(dirs[1]);
  s.coords.resize(grid, 0.0);
  if (grid > 1)
    for (std::size_t i = 0; i < grid; ++i)
      s.coords[i] = extent * static_cast<double>(2 * static_cast<long>(i) - static_cast<long>(grid - 1)) /
                    static_cast<double>(grid - 1);
  s.values.assign(grid * grid, 0.0);
  parallel_for(grid * grid, [&](std::size_t cell) {
    const double a = s.coords[cell % grid], b = s.coords[cell / grid];
    std::vector<double> t(theta0.begin(), theta0.end());
    for (std::size_t k = 0; k < t.size(); ++k) t[k] += a * s.u[k] + b * s.v[k];
    s.values[cell] = loss(t);
  });
  return s;
}

SubspaceResult subspace_descent(const LossWithGradient& loss, std::span<const double> theta0, std::size_t dsub,
                                std::size_t iters, double step, Rng& rng) {
  const std::size_t dim = theta0.size();
  if (dsub < 1 || dsub > dim) throw PreconditionViolation("subspace dimension must lie in [1, parameter count]");
  SubspaceResult r;
  r.basis = random_orthonormal(dim, dsub, rng);
  std::vector<double> c(dsub, 0.0);
  auto theta_of = [&] {
    std::vector<double> t(theta0.begin(), theta0.end());
    for (std::size_t j = 0; j < dsub; ++j)
      for (std::size_t k = 0; k < dim; ++k) t[k] += r.basis[j][k] * c[j];
    return t;
  };
  for (std::size_t it = 0; it < iters; ++it) {
    const auto lr = loss(theta_of());
    r.losses.push_back(lr.value);
    for (std::size_t j = 0; j < dsub; ++j) c[j] -= step * dot(r.basis[j], lr.gradient);
  }
  r.theta = theta_of();
  r.final_loss = loss(r.theta).value;
  return r;
}

std::vector<double> sgd(const LossWithGradient& loss, std::span<const double> theta0, std::size_t iters, double step,
                        double momentum) {
  std::vector<double> theta(theta0.begin(), theta0.end());
  std::vector<double> velocity(theta.size(), 0.0);
  for (std::size_t it = 0; it < iters; ++it) {
    const auto lr = loss(theta);
    for (std::size_t k = 0; k < theta.size(); ++k) {
      velocity[k] = momentum * velocity[k] - step * lr.gradient[k];
      theta[k] += velocity[k];
    }
  }
  return theta;
}

CriticalSearch find_critical_points(const Polynomial<double>& p, Rng& rng, const CriticalSearchOptions& options) {
  const std::size_t n = p.nvars();
  if (n == 0) throw PreconditionViolation("polynomial has no variables");
  const CompiledPolynomial cp(p);

  struct Outcome {
    bool converged = false;
    std::vector<double> x;
    double gnorm = 0.0;
  };
  std::vector<Outcome> outcomes(options.starts);
  parallel_for(options.starts, [&](std::size_t s) {
    Rng local = rng.substream(s);
    std::vector<double> x(n), g, h, trial(n), gt;
    for (auto& v : x) v = local.uniform(options.lo, options.hi);
    cp.gradient(x, g);
    double gn = norm(g);
    double mu = 1e-3;
    Eigen::MatrixXd hm(n, n);
    Eigen::VectorXd gv(n);
    for (std::size_t it = 0; it < options.max_iterations && gn > options.gradient_tolerance; ++it) {
      cp.hessian(x, h);
      for (std::size_t i = 0; i < n; ++i) {
        gv(i) = g[i];
        for (std::size_t j = 0; j < n; ++j) hm(i, j) = h[i * n + j];
      }
      Eigen::MatrixXd normal = hm.transpose() * hm;
      normal.diagonal().array() += mu;
      const Eigen::VectorXd delta = normal.ldlt().solve(-(hm.transpose() * gv));
      for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + delta(i);
      cp.gradient(trial, gt);
      const double gtn = norm(gt);
      if (std::isfinite(gtn) && gtn < gn) {
        x = trial;
        g = gt;
        gn = gtn;
        mu = std::max(mu * 0.25, 1e-15);
      } else {
        mu *= 4.0;
        if (mu > 1e12) break;
      }
      if (norm(x) > 1e8) break;
    }
    outcomes[s] = {gn <= options.gradient_tolerance, x, gn};
  });

  CriticalSearch out;
  for (auto& o : outcomes) {
    if (!o.converged) {
      ++out.failed_starts;
      continue;
    }
    bool duplicate = false;
    for (const auto& q : out.points) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < n; ++k) d2 += (q.point[k] - o.x[k]) * (q.point[k] - o.x[k]);
      if (std::sqrt(d2) <= options.dedup_radius) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;
    CriticalPoint cpt;
    cpt.point = std::move(o.x);
    cpt.gradient_norm = o.gnorm;
    cpt.spectrum = spectrum(hessian(p, cpt.point));
    cpt.kind = classify_critical_point(cpt.spectrum);
    out.points.push_back(std::move(cpt));
  }
  std::sort(out.points.begin(), out.points.end(),
            [](const CriticalPoint& a, const CriticalPoint& b) { return a.point < b.point; });
  return out;
}

}  // namespace carvelab
