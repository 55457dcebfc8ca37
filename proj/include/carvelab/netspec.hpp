#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "carvelab/rational.hpp"

namespace carvelab {

enum class NeuronKind { Input, Relu, Linear, Sigmoid, Mul };

std::string_view kind_name(NeuronKind kind);

struct Edge {
  std::string source;
  Rational weight;
};

struct NeuronDecl {
  std::string id;
  NeuronKind kind = NeuronKind::Relu;
  std::vector<Edge> incoming;
  Rational bias;
};

enum class Activation : std::uint8_t { Inactive = 0, Active = 1 };

/// Active/Inactive state of every relu neuron, in topological order.
/// `boundary` is set when some preactivation was exactly zero at the
/// evaluation point (the point lies on a bend-line, not inside a cell).
struct ActivationPattern {
  std::vector<Activation> bits;
  bool boundary = false;

  std::size_t size() const { return bits.size(); }
  bool active(std::size_t i) const { return bits[i] == Activation::Active; }

  /// "A"/"I" string, e.g. "AIA".
  std::string str() const;
  static ActivationPattern from_string(std::string_view s);

  bool operator==(const ActivationPattern& o) const { return bits == o.bits; }
  auto operator<=>(const ActivationPattern& o) const { return bits <=> o.bits; }
};

/// Immutable computation graph. Construction validates the declaration list
/// and precomputes the topological order; every accessor is const.
class Network {
 public:
  struct Input {
    std::size_t source;
    Rational weight;
    double weight_d;
  };

  Network(std::vector<NeuronDecl> neurons, std::size_t input_dim, std::string name = {},
          std::uint64_t seed = 0);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t size() const { return decls_.size(); }
  const std::string& name() const { return name_; }
  std::uint64_t seed() const { return seed_; }

  const std::vector<NeuronDecl>& neurons() const { return decls_; }
  const NeuronDecl& neuron(std::size_t i) const { return decls_[i]; }
  NeuronKind kind(std::size_t i) const { return decls_[i].kind; }
  const std::vector<Input>& inputs_of(std::size_t i) const { return in_[i]; }
  const Rational& bias(std::size_t i) const { return decls_[i].bias; }
  double bias_d(std::size_t i) const { return bias_d_[i]; }

  std::size_t index_of(std::string_view id) const;
  std::optional<std::size_t> find(std::string_view id) const;

  /// Topological order, ties broken by declaration order.
  const std::vector<std::size_t>& order() const { return order_; }
  /// Input neurons in declaration order; position k is input coordinate x_k.
  const std::vector<std::size_t>& input_neurons() const { return input_neurons_; }
  /// Relu neurons in topological order (the layout of ActivationPattern).
  const std::vector<std::size_t>& relu_neurons() const { return relu_neurons_; }
  /// Position of neuron i inside relu_neurons(), or npos.
  std::size_t relu_slot(std::size_t i) const { return relu_slot_[i]; }
  /// Non-input neurons nothing else reads from.
  const std::vector<std::size_t>& outputs() const { return outputs_; }
  /// Longest path length from any input (inputs have layer 0).
  std::size_t layer(std::size_t i) const { return layer_[i]; }
  std::size_t depth() const;

  /// Number of relu neurons per layer index 1..depth (zero-width layers kept).
  std::vector<std::size_t> relu_widths() const;

  bool pure_relu() const;
  bool has_mul() const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::vector<NeuronDecl> decls_;
  std::size_t input_dim_;
  std::string name_;
  std::uint64_t seed_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<Input>> in_;
  std::vector<double> bias_d_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> input_neurons_;
  std::vector<std::size_t> relu_neurons_;
  std::vector<std::size_t> relu_slot_;
  std::vector<std::size_t> outputs_;
  std::vector<std::size_t> layer_;
};

enum class NumberMode {
  Exact,  ///< numbers must be "p/q" strings or JSON integers
  Float,  ///< JSON floating-point numbers also accepted (converted exactly)
};

/// Parses the JSON network document. Throws ParseError, CycleError or
/// DanglingReference.
Network parse_network(std::string_view text, NumberMode mode = NumberMode::Exact);
Network load_network(const std::string& path, NumberMode mode = NumberMode::Exact);
std::string to_json(const Network& net);

std::vector<std::size_t> topo_sort(const Network& net);

/// Value of every neuron (indexed like Network::neurons()).
std::vector<double> forward(const Network& net, std::span<const double> x);
/// Exact evaluation; sigmoid neurons are not representable and throw
/// UnsupportedNeuron.
std::vector<Rational> forward_exact(const Network& net, std::span<const Rational> x);
/// Forward pass with relu gates forced by `pattern` instead of by sign.
std::vector<double> forward_masked(const Network& net, std::span<const double> x,
                                   const ActivationPattern& pattern);

/// Preactivation (weighted sum plus bias) of every non-input, non-mul neuron.
std::vector<double> preactivations(const Network& net, std::span<const double> x);

ActivationPattern activation_pattern(const Network& net, std::span<const double> x);
ActivationPattern activation_pattern_exact(const Network& net, std::span<const Rational> x);

struct ConvFilter {
  std::size_t size = 0;           ///< k for a k-by-k window
  std::vector<Rational> weights;  ///< row-major, k*k entries
  Rational bias;
};

struct ImageShape {
  std::size_t rows = 0;
  std::size_t cols = 0;
};

/// Weight-shared dense network equivalent to a single relu convolution layer
/// over a flattened row-major image. Output neuron "f{f}_{r}_{c}" sees the
/// window whose top-left pixel is (r*stride, c*stride).
Network unroll_conv(const std::vector<ConvFilter>& filters, ImageShape image, std::size_t stride);

/// Elman cell h_t = relu(W_in x_t + W_hh h_{t-1} + b_h), y = W_out h_T + b_out,
/// with h_0 = 0. Matrices are row-major.
struct RnnCell {
  std::size_t input_size = 0;
  std::size_t hidden_size = 0;
  std::size_t output_size = 0;
  std::vector<Rational> w_in;   ///< hidden x input
  std::vector<Rational> w_hh;   ///< hidden x hidden
  std::vector<Rational> b_h;    ///< hidden
  std::vector<Rational> w_out;  ///< output x hidden
  std::vector<Rational> b_out;  ///< output
};

Network unroll_rnn(const RnnCell& cell, std::size_t steps);

}  // namespace carvelab
