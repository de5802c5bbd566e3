#pragma once

// Shallow networks that classify a polygonal region as the nilpotent AND of
// k soft inequalities: a trainable 2 -> k inequality layer feeding one frozen
// AND perceptron (weights 1, bias -(k-1)).

#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "nilnet/datasets.hpp"
#include "nilnet/errors.hpp"
#include "nilnet/logic_core.hpp"
#include "nilnet/network.hpp"

namespace nilnet {

struct GateNetworkSpec {
  std::size_t k = 2;
  double beta_layer1 = 0.1;
  double beta_gate = 0.1;
  // Replaces the Squashing activation in both layers (for comparisons).
  Activation activation = Activation::squashing;
  InitScheme init_scheme = InitScheme::glorot_uniform;
};

/// 2 -> k inequality layer plus the frozen k -> 1 AND gate, with a
/// binary_gate output head.
template <class Rng>
Network build_gate_network(const GateNetworkSpec& spec, Rng& rng) {
  if (spec.k == 0) {
    throw InvalidParameter("build_gate_network: k must be >= 1");
  }
  const auto k = static_cast<Eigen::Index>(spec.k);
  auto act_for = [&](double beta) {
    if (spec.activation == Activation::squashing) return ActivationKind::squashing(beta, true);
    return ActivationKind{spec.activation};
  };
  Network net;
  net.head = OutputHead::binary_gate;
  net.layers.push_back(make_dense(2, k, act_for(spec.beta_layer1), spec.init_scheme, rng));

  DenseLayer gate;
  gate.weights = Matrix::Ones(1, k);
  gate.bias = Vector::Constant(1, -static_cast<double>(spec.k - 1));
  gate.activation = act_for(spec.beta_gate);
  gate.trainable_weights = false;
  gate.trainable_bias = false;
  if (gate.activation.is_squashing()) {
    gate.beta = spec.beta_gate;
    gate.trainable_beta = true;
  }
  net.layers.push_back(std::move(gate));
  return net;
}

/// True iff the AND layer still holds weights 1 and bias -(k-1) exactly.
inline bool gate_is_intact(const Network& net) {
  if (net.layers.size() != 2) return false;
  const DenseLayer& g = net.layers[1];
  const auto k = g.fan_in();
  return g.fan_out() == 1 && (g.weights.array() == 1.0).all() &&
         g.bias(0) == -static_cast<double>(k - 1);
}

// ---------------------------------------------------------------------------
// AND trees

/// Binary tree of two-input crisp conjunctions over inputs g_0..g_{k-1}.
struct AndTree {
  struct Node;
  using Ptr = std::shared_ptr<const Node>;
  struct Node {
    std::variant<std::size_t, std::pair<Ptr, Ptr>> content;
  };

  Ptr root;

  static AndTree leaf(std::size_t input) {
    return {std::make_shared<const Node>(Node{input})};
  }
  static AndTree both(const AndTree& l, const AndTree& r) {
    return {std::make_shared<const Node>(Node{std::make_pair(l.root, r.root)})};
  }

  /// Balanced tree over inputs [first, first + count).
  static AndTree balanced(std::size_t count, std::size_t first = 0) {
    if (count == 0) throw InvalidParameter("AndTree::balanced: empty");
    if (count == 1) return leaf(first);
    const std::size_t left = count / 2;
    return both(balanced(left, first), balanced(count - left, first + left));
  }
};

namespace detail {

inline void collect_leaves(const AndTree::Ptr& n, std::vector<std::size_t>& out) {
  if (const auto* idx = std::get_if<std::size_t>(&n->content)) {
    out.push_back(*idx);
    return;
  }
  const auto& [l, r] = std::get<std::pair<AndTree::Ptr, AndTree::Ptr>>(n->content);
  collect_leaves(l, out);
  collect_leaves(r, out);
}

inline double eval_node(const AndTree::Ptr& n, std::span<const double> g) {
  if (const auto* idx = std::get_if<std::size_t>(&n->content)) {
    return g[*idx];
  }
  const auto& [l, r] = std::get<std::pair<AndTree::Ptr, AndTree::Ptr>>(n->content);
  return named_operator(OperatorKind::conjunction, eval_node(l, g), eval_node(r, g));
}

}  // namespace detail

inline std::vector<std::size_t> and_tree_leaves(const AndTree& tree) {
  std::vector<std::size_t> out;
  detail::collect_leaves(tree.root, out);
  return out;
}

/// Crisp evaluation of the nested tree, each node being [x + y - 1].
inline double eval_and_tree(const AndTree& tree, std::span<const double> g) {
  for (std::size_t i : and_tree_leaves(tree)) {
    if (i >= g.size()) throw ShapeError("eval_and_tree: input index out of range");
  }
  return detail::eval_node(tree.root, g);
}

/// Collapses a nested AND tree over k distinct inputs into the single gate
/// [g_1 + ... + g_k - (k-1)]. Weight i belongs to input index i.
inline NilpotentOperatorSpec flatten_and_tree(const AndTree& tree) {
  const auto leaves = and_tree_leaves(tree);
  const std::set<std::size_t> distinct(leaves.begin(), leaves.end());
  if (distinct.size() != leaves.size()) {
    throw InvalidParameter("flatten_and_tree: leaves must be distinct inputs");
  }
  if (*distinct.rbegin() + 1 != leaves.size()) {
    throw InvalidParameter("flatten_and_tree: leaves must cover inputs 0..k-1");
  }
  const std::size_t k = leaves.size();
  return {std::vector<double>(k, 1.0), -static_cast<double>(k - 1)};
}

// ---------------------------------------------------------------------------
// Crisp reading of a trained gate network

namespace detail {

inline double crisp_activation(double z, const DenseLayer& layer) {
  switch (layer.activation.type) {
    case Activation::squashing: return crisp_squash(z, layer.squashing());
    case Activation::identity: return z;
    case Activation::relu: return std::max(z, 0.0);
    case Activation::sigmoid: return logistic(z);
    case Activation::tanh: return std::tanh(z);
  }
  return z;
}

}  // namespace detail

/// Network output with every Squashing activation replaced by its crisp limit
/// (cut, or 1 - cut where beta < 0).
inline double crisp_output(const Network& net, double x, double y) {
  Vector a(2);
  a << x, y;
  for (const auto& layer : net.layers) {
    Vector z = layer.weights * a + layer.bias;
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = detail::crisp_activation(z(i), layer);
    a = std::move(z);
  }
  return a(0);
}

using RegionPredicate = std::function<bool(double, double)>;

/// Class-1 membership of the crisp network: output o above one half.
inline RegionPredicate crisp_decision_region(const Network& net) {
  return [net](double x, double y) { return crisp_output(net, x, y) > 0.5; };
}

inline double region_accuracy(const RegionPredicate& region, const LabeledDataset& ds) {
  if (ds.size() == 0) throw ShapeError("region_accuracy: empty dataset");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const int pred = region(ds.features(r, 0), ds.features(r, 1)) ? 1 : 0;
    hit += pred == ds.labels[i] ? 1 : 0;
  }
  return static_cast<double>(hit) / static_cast<double>(ds.size());
}

// ---------------------------------------------------------------------------
// Explanations

/// Layer-1 unit i read back as the inequality  w_x x + w_y y + offset >= 0
/// (or <= 0 when the layer's beta is negative). The boundary is the unit's
/// half-truth level, where its cutting function crosses 1/2.
struct LineExplanation {
  double w_x = 0.0;
  double w_y = 0.0;
  double offset = 0.0;
  Sense sense = Sense::ge;
  bool vacuous = false;  // zero row: the condition does not depend on (x, y)

  bool holds(double x, double y) const {
    const double v = w_x * x + w_y * y + offset;
    return sense == Sense::ge ? v >= 0.0 : v <= 0.0;
  }

  /// Same half-plane as a LineSpec (b*y >= m*x + c form).
  LineSpec as_line() const {
    const double s = sense == Sense::ge ? 1.0 : -1.0;
    return {-s * w_x, s * w_y, -s * offset, Sense::ge};
  }

  std::string text() const {
    if (vacuous) {
      return holds(0.0, 0.0) ? "vacuous condition (always true)" : "vacuous condition (never true)";
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "%.6g*x %+.6g*y %+.6g %s 0", w_x, w_y, offset,
                  sense == Sense::ge ? ">=" : "<=");
    return buf;
  }
};

struct GateExplanation {
  std::vector<LineExplanation> lines;
  bool complement = false;  // gate beta < 0: region is the complement of the AND

  bool contains(double x, double y) const {
    bool all = true;
    for (const auto& l : lines) all = all && l.holds(x, y);
    return complement ? !all : all;
  }

  std::string text() const {
    std::string s = complement ? "region = complement of AND(\n" : "region = AND(\n";
    for (const auto& l : lines) s += "  " + l.text() + "\n";
    s += ")\n";
    return s;
  }
};

inline GateExplanation extract_line_explanations(const Network& net) {
  if (net.layers.size() != 2 || net.layers[0].fan_in() != 2) {
    throw ShapeError("extract_line_explanations: expects a 2 -> k -> 1 gate network");
  }
  const DenseLayer& l1 = net.layers[0];
  const DenseLayer& gate = net.layers[1];
  const double level = l1.activation.is_squashing() ? l1.activation.a : 0.0;
  const bool decreasing = l1.activation.is_squashing() && l1.beta < 0.0;
  GateExplanation ex;
  ex.complement = gate.activation.is_squashing() && gate.beta < 0.0;
  for (Eigen::Index i = 0; i < l1.fan_out(); ++i) {
    LineExplanation e;
    e.w_x = l1.weights(i, 0);
    e.w_y = l1.weights(i, 1);
    e.offset = l1.bias(i) - level;
    e.sense = decreasing ? Sense::le : Sense::ge;
    e.vacuous = e.w_x == 0.0 && e.w_y == 0.0;
    ex.lines.push_back(e);
  }
  return ex;
}

inline nlohmann::json explanation_json(const GateExplanation& ex) {
  nlohmann::json lines = nlohmann::json::array();
  for (const auto& l : ex.lines) {
    const LineSpec ls = l.as_line();
    lines.push_back({{"w_x", l.w_x},
                     {"w_y", l.w_y},
                     {"offset", l.offset},
                     {"sense", l.sense == Sense::ge ? ">=" : "<="},
                     {"m", ls.m},
                     {"b", ls.b},
                     {"c", ls.c},
                     {"vacuous", l.vacuous},
                     {"text", l.text()}});
  }
  return {{"semantics", ex.complement ? "complement of AND" : "AND"}, {"lines", lines}};
}

/// Writes the half-planes `lines` into layer 1 so that each unit's
/// half-truth level lies on its line; `sharpness` scales the rows.
/// Assumes a positive layer-1 beta.
inline void plant_lines(Network& net, const std::vector<LineSpec>& lines, double sharpness) {
  DenseLayer& l1 = net.layers.at(0);
  if (static_cast<Eigen::Index>(lines.size()) != l1.fan_out()) {
    throw ShapeError("plant_lines: one line per layer-1 unit required");
  }
  const double level = l1.activation.is_squashing() ? l1.activation.a : 0.0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const LineSpec& ln = lines[i];
    const double s = ln.sense == Sense::ge ? sharpness : -sharpness;
    const auto r = static_cast<Eigen::Index>(i);
    l1.weights(r, 0) = -s * ln.m;
    l1.weights(r, 1) = s * ln.b;
    l1.bias(r) = -s * ln.c + level;
  }
}

}  // namespace nilnet
