#include "carvelab/netspec.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>

#include <json.hpp>

#include "carvelab/error.hpp"

namespace carvelab {

using json = nlohmann::json;

std::string_view kind_name(NeuronKind kind) {
  switch (kind) {
    case NeuronKind::Input: return "input";
    case NeuronKind::Relu: return "relu";
    case NeuronKind::Linear: return "linear";
    case NeuronKind::Sigmoid: return "sigmoid";
    case NeuronKind::Mul: return "mul";
  }
  return "?";
}

namespace {

NeuronKind parse_kind(const std::string& s) {
  if (s == "input") return NeuronKind::Input;
  if (s == "relu") return NeuronKind::Relu;
  if (s == "linear") return NeuronKind::Linear;
  if (s == "sigmoid") return NeuronKind::Sigmoid;
  if (s == "mul") return NeuronKind::Mul;
  throw ParseError("unknown neuron kind '" + s + "'");
}

Rational parse_number(const json& v, NumberMode mode, const std::string& where) {
  if (v.is_string()) {
    try {
      return parse_rational(v.get<std::string>());
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  if (v.is_number_integer()) return Rational(v.get<long long>());
  if (v.is_number_float()) {
    if (mode != NumberMode::Float)
      throw ParseError(where + ": floating-point literal requires float mode");
    return rational_from_double(v.get<double>());
  }
  throw ParseError(where + ": expected a number");
}

}  // namespace

std::string ActivationPattern::str() const {
  std::string s;
  s.reserve(bits.size());
  for (auto b : bits) s.push_back(b == Activation::Active ? 'A' : 'I');
  return s;
}

ActivationPattern ActivationPattern::from_string(std::string_view s) {
  ActivationPattern p;
  p.bits.reserve(s.size());
  for (char c : s) {
    if (c == 'A') p.bits.push_back(Activation::Active);
    else if (c == 'I') p.bits.push_back(Activation::Inactive);
    else throw ParseError("activation pattern must contain only 'A' and 'I'");
  }
  return p;
}

Network::Network(std::vector<NeuronDecl> neurons, std::size_t input_dim, std::string name,
                 std::uint64_t seed)
    : decls_(std::move(neurons)), input_dim_(input_dim), name_(std::move(name)), seed_(seed) {
  const std::size_t n = decls_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (decls_[i].id.empty()) throw ParseError("neuron with empty id");
    if (!index_.emplace(decls_[i].id, i).second)
      throw ParseError("duplicate neuron id '" + decls_[i].id + "'");
  }

  in_.resize(n);
  bias_d_.resize(n);
  std::vector<std::vector<std::size_t>> consumers(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& d = decls_[i];
    if (d.kind == NeuronKind::Input) {
      if (!d.incoming.empty()) throw ParseError("input neuron '" + d.id + "' has incoming edges");
      if (d.bias != 0) throw ParseError("input neuron '" + d.id + "' has a bias");
      input_neurons_.push_back(i);
      continue;
    }
    if (d.incoming.empty()) throw ParseError("neuron '" + d.id + "' has no incoming edge");
    if (d.kind == NeuronKind::Mul) {
      if (d.incoming.size() != 2)
        throw ParseError("mul neuron '" + d.id + "' needs exactly 2 operands");
      for (auto& e : d.incoming) e.weight = 1;
      d.bias = 0;
    }
    for (const auto& e : d.incoming) {
      auto it = index_.find(e.source);
      if (it == index_.end())
        throw DanglingReference("neuron '" + d.id + "' references undeclared id '" + e.source + "'");
      in_[i].push_back({it->second, e.weight, to_double(e.weight)});
      consumers[it->second].push_back(i);
    }
    bias_d_[i] = to_double(d.bias);
  }
  if (input_neurons_.size() != input_dim_ || input_dim_ == 0)
    throw ParseError("input_dim " + std::to_string(input_dim_) + " does not match " +
                     std::to_string(input_neurons_.size()) + " declared input neurons");

  // Kahn's algorithm; the min-heap on declaration index makes ties deterministic.
  std::vector<std::size_t> indegree(n, 0);
  for (std::size_t i = 0; i < n; ++i) indegree[i] = in_[i].size();
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indegree[i] == 0) ready.push(i);
  while (!ready.empty()) {
    const std::size_t i = ready.top();
    ready.pop();
    order_.push_back(i);
    for (std::size_t c : consumers[i])
      if (--indegree[c] == 0) ready.push(c);
  }
  if (order_.size() != n) {
    for (std::size_t i = 0; i < n; ++i)
      if (indegree[i] != 0) throw CycleError("cycle through neuron '" + decls_[i].id + "'");
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (decls_[i].kind == NeuronKind::Sigmoid && !consumers[i].empty())
      throw ParseError("sigmoid neuron '" + decls_[i].id +
                       "' feeds another neuron; sigmoid is only allowed as final squashing");
  }

  layer_.assign(n, 0);
  relu_slot_.assign(n, npos);
  for (std::size_t i : order_) {
    for (const auto& e : in_[i]) layer_[i] = std::max(layer_[i], layer_[e.source] + 1);
    if (decls_[i].kind == NeuronKind::Relu) {
      relu_slot_[i] = relu_neurons_.size();
      relu_neurons_.push_back(i);
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (decls_[i].kind != NeuronKind::Input && consumers[i].empty()) outputs_.push_back(i);
}

std::size_t Network::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) throw DanglingReference("no neuron with id '" + std::string(id) + "'");
  return it->second;
}

std::optional<std::size_t> Network::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Network::depth() const {
  std::size_t d = 0;
  for (auto l : layer_) d = std::max(d, l);
  return d;
}

std::vector<std::size_t> Network::relu_widths() const {
  std::vector<std::size_t> widths(depth(), 0);
  for (std::size_t i : relu_neurons_) ++widths[layer_[i] - 1];
  return widths;
}

bool Network::pure_relu() const {
  return std::none_of(decls_.begin(), decls_.end(), [](const NeuronDecl& d) {
    return d.kind == NeuronKind::Mul || d.kind == NeuronKind::Sigmoid;
  });
}

bool Network::has_mul() const {
  return std::any_of(decls_.begin(), decls_.end(),
                     [](const NeuronDecl& d) { return d.kind == NeuronKind::Mul; });
}

Network parse_network(std::string_view text, NumberMode mode) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("network document must be a JSON object");
  if (!doc.contains("input_dim") || !doc["input_dim"].is_number_integer() ||
      doc["input_dim"].get<long long>() < 1)
    throw ParseError("'input_dim' must be a positive integer");
  if (!doc.contains("neurons") || !doc["neurons"].is_array())
    throw ParseError("'neurons' must be an array");

  std::vector<NeuronDecl> decls;
  for (const auto& item : doc["neurons"]) {
    if (!item.is_object() || !item.contains("id") || !item["id"].is_string() ||
        !item.contains("kind") || !item["kind"].is_string())
      throw ParseError("each neuron needs string fields 'id' and 'kind'");
    NeuronDecl d;
    d.id = item["id"].get<std::string>();
    d.kind = parse_kind(item["kind"].get<std::string>());
    if (item.contains("bias")) d.bias = parse_number(item["bias"], mode, d.id + ".bias");
    if (item.contains("in")) {
      if (!item["in"].is_array()) throw ParseError(d.id + ".in must be an array");
      for (const auto& e : item["in"]) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_string())
          throw ParseError(d.id + ".in entries must be [source, weight] pairs");
        d.incoming.push_back({e[0].get<std::string>(), parse_number(e[1], mode, d.id + ".in")});
      }
    }
    decls.push_back(std::move(d));
  }
  std::string name = doc.value("name", std::string{});
  std::uint64_t seed = 0;
  if (doc.contains("seed") && doc["seed"].is_number_unsigned()) seed = doc["seed"].get<std::uint64_t>();
  return Network(std::move(decls), doc["input_dim"].get<std::size_t>(), std::move(name), seed);
}

Network load_network(const std::string& path, NumberMode mode) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open network file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_network(ss.str(), mode);
}

std::string to_json(const Network& net) {
  json doc;
  doc["input_dim"] = net.input_dim();
  if (!net.name().empty()) doc["name"] = net.name();
  doc["seed"] = net.seed();
  json neurons = json::array();
  for (const auto& d : net.neurons()) {
    json item;
    item["id"] = d.id;
    item["kind"] = std::string(kind_name(d.kind));
    if (d.kind != NeuronKind::Input) {
      item["bias"] = to_string(d.bias);
      json in = json::array();
      for (const auto& e : d.incoming) in.push_back({e.source, to_string(e.weight)});
      item["in"] = std::move(in);
    }
    neurons.push_back(std::move(item));
  }
  doc["neurons"] = std::move(neurons);
  return doc.dump(1);
}

std::vector<std::size_t> topo_sort(const Network& net) { return net.order(); }

namespace {

void check_dim(const Network& net, std::size_t n) {
  if (n != net.input_dim())
    throw DimensionMismatch("input has " + std::to_string(n) + " coordinates, network expects " +
                            std::to_string(net.input_dim()));
}

}  // namespace

std::vector<double> forward(const Network& net, std::span<const double> x) {
  check_dim(net, x.size());
  std::vector<double> v(net.size(), 0.0);
  const auto& inputs = net.input_neurons();
  for (std::size_t k = 0; k < inputs.size(); ++k) v[inputs[k]] = x[k];
  for (std::size_t i : net.order()) {
    const auto kind = net.kind(i);
    if (kind == NeuronKind::Input) continue;
    const auto& in = net.inputs_of(i);
    if (kind == NeuronKind::Mul) {
      v[i] = v[in[0].source] * v[in[1].source];
      continue;
    }
    double z = net.bias_d(i);
    for (const auto& e : in) z += e.weight_d * v[e.source];
    switch (kind) {
      case NeuronKind::Relu: v[i] = z > 0.0 ? z : 0.0; break;
      case NeuronKind::Sigmoid: v[i] = 1.0 / (1.0 + std::exp(-z)); break;
      default: v[i] = z; break;
    }
  }
  return v;
}

std::vector<Rational> forward_exact(const Network& net, std::span<const Rational> x) {
  check_dim(net, x.size());
  std::vector<Rational> v(net.size());
  const auto& inputs = net.input_neurons();
  for (std::size_t k = 0; k < inputs.size(); ++k) v[inputs[k]] = x[k];
  for (std::size_t i : net.order()) {
    const auto kind = net.kind(i);
    if (kind == NeuronKind::Input) continue;
    const auto& in = net.inputs_of(i);
    if (kind == NeuronKind::Mul) {
      v[i] = v[in[0].source] * v[in[1].source];
      continue;
    }
    if (kind == NeuronKind::Sigmoid)
      throw UnsupportedNeuron("sigmoid neuron '" + net.neuron(i).id + "' has no exact value");
    Rational z = net.bias(i);
    for (const auto& e : in) z += e.weight * v[e.source];
    if (kind == NeuronKind::Relu && z < 0) z = 0;
    v[i] = std::move(z);
  }
  return v;
}

std::vector<double> forward_masked(const Network& net, std::span<const double> x,
                                   const ActivationPattern& pattern) {
  check_dim(net, x.size());
  if (pattern.size() != net.relu_neurons().size())
    throw DimensionMismatch("activation pattern length does not match relu count");
  std::vector<double> v(net.size(), 0.0);
  const auto& inputs = net.input_neurons();
  for (std::size_t k = 0; k < inputs.size(); ++k) v[inputs[k]] = x[k];
  for (std::size_t i : net.order()) {
    const auto kind = net.kind(i);
    if (kind == NeuronKind::Input) continue;
    const auto& in = net.inputs_of(i);
    if (kind == NeuronKind::Mul) {
      v[i] = v[in[0].source] * v[in[1].source];
      continue;
    }
    double z = net.bias_d(i);
    for (const auto& e : in) z += e.weight_d * v[e.source];
    switch (kind) {
      case NeuronKind::Relu: v[i] = pattern.active(net.relu_slot(i)) ? z : 0.0; break;
      case NeuronKind::Sigmoid: v[i] = 1.0 / (1.0 + std::exp(-z)); break;
      default: v[i] = z; break;
    }
  }
  return v;
}

std::vector<double> preactivations(const Network& net, std::span<const double> x) {
  const auto v = forward(net, x);
  std::vector<double> z(net.size(), 0.0);
  for (std::size_t i = 0; i < net.size(); ++i) {
    const auto kind = net.kind(i);
    if (kind == NeuronKind::Input || kind == NeuronKind::Mul) {
      z[i] = v[i];
      continue;
    }
    double s = net.bias_d(i);
    for (const auto& e : net.inputs_of(i)) s += e.weight_d * v[e.source];
    z[i] = s;
  }
  return z;
}

ActivationPattern activation_pattern(const Network& net, std::span<const double> x) {
  const auto z = preactivations(net, x);
  ActivationPattern p;
  p.bits.reserve(net.relu_neurons().size());
  for (std::size_t i : net.relu_neurons()) {
    p.bits.push_back(z[i] > 0.0 ? Activation::Active : Activation::Inactive);
    if (z[i] == 0.0) p.boundary = true;
  }
  return p;
}

ActivationPattern activation_pattern_exact(const Network& net, std::span<const Rational> x) {
  check_dim(net, x.size());
  // Own pass instead of forward_exact: a sigmoid is only a problem if some
  // relu actually reads it.
  std::vector<Rational> v(net.size());
  std::vector<bool> opaque(net.size(), false);
  const auto& inputs = net.input_neurons();
  for (std::size_t k = 0; k < inputs.size(); ++k) v[inputs[k]] = x[k];
  std::vector<Rational> pre(net.size());
  for (std::size_t i : net.order()) {
    const auto kind = net.kind(i);
    if (kind == NeuronKind::Input) continue;
    const auto& in = net.inputs_of(i);
    bool blind = false;
    for (const auto& e : in) blind = blind || opaque[e.source];
    if (kind == NeuronKind::Sigmoid || blind) {
      if (kind == NeuronKind::Relu)
        throw UnsupportedNeuron("relu neuron '" + net.neuron(i).id + "' depends on a sigmoid");
      opaque[i] = true;
      continue;
    }
    if (kind == NeuronKind::Mul) {
      v[i] = v[in[0].source] * v[in[1].source];
      continue;
    }
    Rational z = net.bias(i);
    for (const auto& e : in) z += e.weight * v[e.source];
    pre[i] = z;
    v[i] = kind == NeuronKind::Relu && !(z > 0) ? Rational(0) : z;
  }
  ActivationPattern p;
  p.bits.reserve(net.relu_neurons().size());
  for (std::size_t i : net.relu_neurons()) {
    p.bits.push_back(pre[i] > 0 ? Activation::Active : Activation::Inactive);
    if (pre[i] == 0) p.boundary = true;
  }
  return p;
}

Network unroll_conv(const std::vector<ConvFilter>& filters, ImageShape image, std::size_t stride) {
  if (filters.empty()) throw ShapeError("at least one filter is required");
  if (stride == 0) throw ShapeError("stride must be positive");
  const std::size_t k = filters.front().size;
  for (const auto& f : filters) {
    if (f.size == 0 || f.size != k) throw ShapeError("all filters must share one positive size");
    if (f.weights.size() != k * k) throw ShapeError("filter weight count must be k*k");
  }
  if (k > image.rows || k > image.cols) throw ShapeError("filter does not fit inside the image");

  std::vector<NeuronDecl> decls;
  auto pixel = [&](std::size_t r, std::size_t c) {
    return "p" + std::to_string(r) + "_" + std::to_string(c);
  };
  for (std::size_t r = 0; r < image.rows; ++r)
    for (std::size_t c = 0; c < image.cols; ++c) decls.push_back({pixel(r, c), NeuronKind::Input, {}, 0});

  const std::size_t out_rows = (image.rows - k) / stride + 1;
  const std::size_t out_cols = (image.cols - k) / stride + 1;
  for (std::size_t f = 0; f < filters.size(); ++f) {
    for (std::size_t orow = 0; orow < out_rows; ++orow) {
      for (std::size_t ocol = 0; ocol < out_cols; ++ocol) {
        NeuronDecl d;
        d.id = "f" + std::to_string(f) + "_" + std::to_string(orow) + "_" + std::to_string(ocol);
        d.kind = NeuronKind::Relu;
        d.bias = filters[f].bias;
        for (std::size_t i = 0; i < k; ++i)
          for (std::size_t j = 0; j < k; ++j)
            d.incoming.push_back({pixel(orow * stride + i, ocol * stride + j), filters[f].weights[i * k + j]});
        decls.push_back(std::move(d));
      }
    }
  }
  return Network(std::move(decls), image.rows * image.cols, "conv-unrolled");
}

Network unroll_rnn(const RnnCell& cell, std::size_t steps) {
  const auto in = cell.input_size, hid = cell.hidden_size, out = cell.output_size;
  if (steps == 0) throw ShapeError("at least one time step is required");
  if (in == 0 || hid == 0 || out == 0) throw ShapeError("cell sizes must be positive");
  if (cell.w_in.size() != hid * in || cell.w_hh.size() != hid * hid || cell.b_h.size() != hid ||
      cell.w_out.size() != out * hid || cell.b_out.size() != out)
    throw ShapeError("cell matrices are inconsistent with the declared sizes");

  auto xid = [](std::size_t t, std::size_t i) { return "x" + std::to_string(t) + "_" + std::to_string(i); };
  auto hidn = [](std::size_t t, std::size_t j) { return "h" + std::to_string(t) + "_" + std::to_string(j); };

  std::vector<NeuronDecl> decls;
  for (std::size_t t = 1; t <= steps; ++t)
    for (std::size_t i = 0; i < in; ++i) decls.push_back({xid(t, i), NeuronKind::Input, {}, 0});
  for (std::size_t t = 1; t <= steps; ++t) {
    for (std::size_t j = 0; j < hid; ++j) {
      NeuronDecl d{hidn(t, j), NeuronKind::Relu, {}, cell.b_h[j]};
      for (std::size_t i = 0; i < in; ++i) d.incoming.push_back({xid(t, i), cell.w_in[j * in + i]});
      if (t > 1)
        for (std::size_t m = 0; m < hid; ++m) d.incoming.push_back({hidn(t - 1, m), cell.w_hh[j * hid + m]});
      decls.push_back(std::move(d));
    }
  }
  for (std::size_t o = 0; o < out; ++o) {
    NeuronDecl d{"y_" + std::to_string(o), NeuronKind::Linear, {}, cell.b_out[o]};
    for (std::size_t j = 0; j < hid; ++j) d.incoming.push_back({hidn(steps, j), cell.w_out[o * hid + j]});
    decls.push_back(std::move(d));
  }
  return Network(std::move(decls), steps * in, "rnn-unrolled");
}

}  // namespace carvelab
