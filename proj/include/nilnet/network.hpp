#pragma once

// Dense feed-forward network with hand-derived backpropagation.
//
// A layer computes Z = X W^T + b and A = act(Z). The Squashing activation
// carries one beta per layer, which may be trained alongside the weights.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "nilnet/errors.hpp"
#include "nilnet/logic_core.hpp"
#include "nilnet/matrix.hpp"

namespace nilnet {

enum class Activation { identity, relu, sigmoid, tanh, squashing };

struct ActivationKind {
  Activation type = Activation::identity;
  // Squashing only.
  double a = 0.5;
  double lambda = 1.0;
  double beta0 = 0.1;
  bool trainable = true;

  static ActivationKind identity() { return {Activation::identity}; }
  static ActivationKind relu() { return {Activation::relu}; }
  static ActivationKind sigmoid() { return {Activation::sigmoid}; }
  static ActivationKind tanh() { return {Activation::tanh}; }
  static ActivationKind squashing(double beta0 = 0.1, bool trainable = true, double a = 0.5,
                                  double lambda = 1.0) {
    // Validates (a, lambda, beta0).
    SquashingParams check(a, lambda, beta0);
    (void)check;
    return {Activation::squashing, a, lambda, beta0, trainable};
  }

  bool is_squashing() const noexcept { return type == Activation::squashing; }

  // "squashing-nl" is the static-beta variant.
  std::string name() const {
    switch (type) {
      case Activation::identity: return "identity";
      case Activation::relu: return "relu";
      case Activation::sigmoid: return "sigmoid";
      case Activation::tanh: return "tanh";
      case Activation::squashing: return trainable ? "squashing" : "squashing-nl";
    }
    return "?";
  }

  static ActivationKind parse(std::string_view name, double beta0 = 0.1) {
    if (name == "identity" || name == "linear") return identity();
    if (name == "relu") return relu();
    if (name == "sigmoid") return sigmoid();
    if (name == "tanh") return tanh();
    if (name == "squashing") return squashing(beta0, true);
    if (name == "squashing-nl") return squashing(beta0, false);
    throw InvalidParameter("unknown activation '" + std::string(name) + "'");
  }
};

struct DenseLayer {
  Matrix weights;  // fan_out x fan_in
  Vector bias;     // fan_out
  ActivationKind activation;
  double beta = 0.0;  // meaningful only for squashing layers
  bool trainable_weights = true;
  bool trainable_bias = true;
  bool trainable_beta = false;

  Eigen::Index fan_in() const noexcept { return weights.cols(); }
  Eigen::Index fan_out() const noexcept { return weights.rows(); }

  SquashingParams squashing() const {
    return {activation.a, activation.lambda, beta};
  }
};

// How the last layer's output becomes class logits.
//   logits:      the output row is used as-is.
//   binary_gate: a single output o in [0,1] becomes the two logits (1 - o, o).
enum class OutputHead { logits, binary_gate };

struct Network {
  std::vector<DenseLayer> layers;
  OutputHead head = OutputHead::logits;

  Eigen::Index input_dim() const { return layers.empty() ? 0 : layers.front().fan_in(); }

  Eigen::Index n_classes() const {
    if (layers.empty()) return 0;
    return head == OutputHead::binary_gate ? 2 : layers.back().fan_out();
  }

  void validate() const {
    if (layers.empty()) {
      throw ShapeError("network: no layers");
    }
    for (std::size_t k = 0; k < layers.size(); ++k) {
      const auto& l = layers[k];
      if (l.bias.size() != l.fan_out()) {
        throw ShapeError("network: layer " + std::to_string(k) + " bias size mismatch");
      }
      if (k > 0 && l.fan_in() != layers[k - 1].fan_out()) {
        throw ShapeError("network: layer " + std::to_string(k) + " fan_in " +
                         std::to_string(l.fan_in()) + " != previous fan_out " +
                         std::to_string(layers[k - 1].fan_out()));
      }
    }
    if (head == OutputHead::binary_gate && layers.back().fan_out() != 1) {
      throw ShapeError("network: binary_gate head needs a single output unit");
    }
  }
};

enum class InitScheme { glorot_uniform, he_uniform, zeros };

inline InitScheme parse_init_scheme(std::string_view name) {
  if (name == "glorot_uniform") return InitScheme::glorot_uniform;
  if (name == "he_uniform") return InitScheme::he_uniform;
  if (name == "zeros") return InitScheme::zeros;
  throw InvalidParameter("unknown init scheme '" + std::string(name) + "'");
}

inline std::string init_scheme_name(InitScheme s) {
  switch (s) {
    case InitScheme::glorot_uniform: return "glorot_uniform";
    case InitScheme::he_uniform: return "he_uniform";
    case InitScheme::zeros: return "zeros";
  }
  return "?";
}

// Half-width of the uniform interval used by a scheme.
inline double init_limit(InitScheme scheme, Eigen::Index fan_out, Eigen::Index fan_in) {
  switch (scheme) {
    case InitScheme::glorot_uniform:
      return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    case InitScheme::he_uniform: return std::sqrt(6.0 / static_cast<double>(fan_in));
    case InitScheme::zeros: return 0.0;
  }
  return 0.0;
}

/// A fan_out x fan_in weight matrix drawn uniformly from +-init_limit.
template <class Rng>
Matrix init_params(Eigen::Index fan_out, Eigen::Index fan_in, InitScheme scheme, Rng& rng) {
  Matrix w = Matrix::Zero(fan_out, fan_in);
  if (w.size() == 0 || scheme == InitScheme::zeros) {
    return w;
  }
  const double limit = init_limit(scheme, fan_out, fan_in);
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    w.data()[i] = dist(rng);
  }
  return w;
}

template <class Rng>
DenseLayer make_dense(Eigen::Index fan_in, Eigen::Index fan_out, const ActivationKind& act,
                      InitScheme scheme, Rng& rng) {
  DenseLayer layer;
  layer.weights = init_params(fan_out, fan_in, scheme, rng);
  layer.bias = Vector::Zero(fan_out);
  layer.activation = act;
  if (act.is_squashing()) {
    layer.beta = act.beta0;
    layer.trainable_beta = act.trainable;
  }
  return layer;
}

/// Multilayer perceptron over `sizes` = {d_in, h1, ..., d_out}.
template <class Rng>
Network make_mlp(const std::vector<int>& sizes, const ActivationKind& hidden,
                 const ActivationKind& output, InitScheme scheme, Rng& rng) {
  if (sizes.size() < 2) {
    throw ShapeError("make_mlp: need at least input and output sizes");
  }
  Network net;
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    const bool last = k + 2 == sizes.size();
    net.layers.push_back(make_dense(sizes[k], sizes[k + 1], last ? output : hidden, scheme, rng));
  }
  return net;
}

namespace detail {

// Whole-matrix Squashing kernels. They use the form
//   S = log1p(sigma(beta q) * expm1(beta lambda)) / (lambda beta),   q = z - a - lambda/2,
// which needs one exponential per element for beta > 0; beta < 0 goes through
// S(z; beta) = 1 - S(z; -beta). Parameters outside the fast path's range fall
// back to the scalar reference functions.
inline bool squash_fast_path(const SquashingParams& p) {
  const double b = std::abs(p.beta());
  return b * p.lambda() / 2.0 >= 1e-3 && b * p.lambda() < 700.0;
}

inline Matrix squash_matrix(const Matrix& z, const SquashingParams& p) {
  if (!squash_fast_path(p)) {
    return z.unaryExpr([&p](double v) { return squash(v, p); });
  }
  const double beta = std::abs(p.beta());
  const double e = std::expm1(beta * p.lambda());
  const double hi = p.a() + p.lambda() / 2.0;
  const auto sv = (1.0 + (-beta * (z.array() - hi)).exp()).inverse();
  Matrix s = ((sv * e).log1p() / (p.lambda() * beta)).min(1.0).matrix();
  if (p.beta() < 0.0) {
    s = (1.0 - s.array()).matrix();
  }
  return s;
}

// dS/dz scaled by the upstream gradient, and the summed dL/dbeta.
inline void squash_backward(const Matrix& z, const Matrix& delta, const SquashingParams& p, Matrix& dz,
                            double& dbeta) {
  if (!squash_fast_path(p)) {
    dz.resize(delta.rows(), delta.cols());
    dbeta = 0.0;
    for (Eigen::Index i = 0; i < delta.size(); ++i) {
      const double v = z.data()[i];
      const double d = delta.data()[i];
      dz.data()[i] = d * squash_dx(v, p);
      dbeta += d * squash_dbeta(v, p);
    }
    return;
  }
  const double beta = std::abs(p.beta());
  const double lam = p.lambda();
  const double e = std::expm1(beta * lam);
  const auto q = (z.array() - (p.a() + lam / 2.0)).eval();
  const auto sv = (1.0 + (-beta * q).exp()).inverse().eval();
  const auto den = (1.0 + sv * e).eval();
  const auto su = (sv * (1.0 + e) / den).eval();  // sigma(beta (q + lambda))
  const auto g = den.log();
  const auto dx = (su - sv) / lam;
  const auto db = (beta * ((q + lam) * su - q * sv) - g) / (lam * beta * beta);
  const double sign = p.beta() < 0.0 ? -1.0 : 1.0;
  dz = (sign * delta.array() * dx).matrix();
  dbeta = (delta.array() * db).sum();
}

inline Matrix activate(const Matrix& z, const DenseLayer& layer) {
  switch (layer.activation.type) {
    case Activation::identity: return z;
    case Activation::relu: return z.cwiseMax(0.0);
    case Activation::sigmoid: return z.unaryExpr([](double v) { return logistic(v); });
    case Activation::tanh: return z.array().tanh().matrix();
    case Activation::squashing: return squash_matrix(z, layer.squashing());
  }
  return z;
}

}  // namespace detail

struct LayerCache {
  Matrix input;  // A_{k-1}
  Matrix pre;    // Z_k
  Matrix post;   // A_k
};

struct ForwardResult {
  Matrix logits;
  std::vector<LayerCache> cache;
};

/// Runs the batch x through every layer and applies the output head.
inline ForwardResult forward(const Network& net, const Matrix& x) {
  net.validate();
  if (x.cols() != net.input_dim()) {
    throw ShapeError("forward: input has " + std::to_string(x.cols()) + " columns, network expects " +
                     std::to_string(net.input_dim()));
  }
  ForwardResult out;
  out.cache.reserve(net.layers.size());
  Matrix a = x;
  for (const auto& layer : net.layers) {
    LayerCache c;
    c.input = std::move(a);
    c.pre = c.input * layer.weights.transpose();
    c.pre.rowwise() += layer.bias.transpose();
    c.post = detail::activate(c.pre, layer);
    a = c.post;
    out.cache.push_back(std::move(c));
  }
  if (net.head == OutputHead::binary_gate) {
    out.logits.resize(a.rows(), 2);
    out.logits.col(0) = (1.0 - a.col(0).array()).matrix();
    out.logits.col(1) = a.col(0);
  } else {
    out.logits = std::move(a);
  }
  return out;
}

/// Class scores only, for inference.
inline Matrix predict_logits(const Network& net, const Matrix& x) { return forward(net, x).logits; }

inline Labels predict(const Network& net, const Matrix& x) {
  const Matrix logits = predict_logits(net, x);
  Labels out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index arg = 0;
    logits.row(i).maxCoeff(&arg);
    out[static_cast<std::size_t>(i)] = static_cast<int>(arg);
  }
  return out;
}

struct LossResult {
  double loss = 0.0;
  Matrix dlogits;
};

/// Mean softmax cross-entropy over the batch and its gradient
/// (softmax - onehot) / batch.
inline LossResult softmax_cross_entropy(const Matrix& logits, const Labels& labels) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size()) {
    throw ShapeError("softmax_cross_entropy: label count does not match batch");
  }
  const Eigen::Index n = logits.rows();
  const Eigen::Index c = logits.cols();
  LossResult out;
  out.dlogits.resize(n, c);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= c) {
      throw ShapeError("softmax_cross_entropy: label " + std::to_string(y) + " out of range");
    }
    const double m = logits.row(i).maxCoeff();
    const auto shifted = (logits.row(i).array() - m).eval();
    const double z = shifted.exp().sum();
    const double log_z = std::log(z);
    total += log_z - shifted(y);
    out.dlogits.row(i) = (shifted.exp() / z).matrix();
    out.dlogits(i, y) -= 1.0;
  }
  const double inv = n > 0 ? 1.0 / static_cast<double>(n) : 0.0;
  out.loss = total * inv;
  out.dlogits *= inv;
  return out;
}

struct LayerGradients {
  Matrix weights;
  Vector bias;
  double beta = 0.0;
};

using Gradients = std::vector<LayerGradients>;

/// Gradients of the loss for every parameter slot, frozen ones included.
/// Freezing is enforced by the optimizer, not here.
inline Gradients backward(const Network& net, const std::vector<LayerCache>& cache,
                          const Matrix& dlogits) {
  if (cache.size() != net.layers.size()) {
    throw ShapeError("backward: cache does not match network depth");
  }
  Matrix delta;
  if (net.head == OutputHead::binary_gate) {
    if (dlogits.cols() != 2) {
      throw ShapeError("backward: binary_gate head expects two logit columns");
    }
    delta = dlogits.col(1) - dlogits.col(0);
  } else {
    delta = dlogits;
  }

  Gradients grads(net.layers.size());
  for (std::size_t k = net.layers.size(); k-- > 0;) {
    const DenseLayer& layer = net.layers[k];
    const LayerCache& c = cache[k];
    if (delta.rows() != c.pre.rows() || delta.cols() != c.pre.cols()) {
      throw ShapeError("backward: gradient shape mismatch at layer " + std::to_string(k));
    }
    Matrix dz;
    LayerGradients& g = grads[k];
    switch (layer.activation.type) {
      case Activation::identity: dz = delta; break;
      case Activation::relu:
        dz = delta.cwiseProduct(c.pre.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
        break;
      case Activation::sigmoid:
        dz = delta.cwiseProduct(c.post.unaryExpr([](double s) { return s * (1.0 - s); }));
        break;
      case Activation::tanh:
        dz = delta.cwiseProduct(c.post.unaryExpr([](double t) { return 1.0 - t * t; }));
        break;
      case Activation::squashing:
        detail::squash_backward(c.pre, delta, layer.squashing(), dz, g.beta);
        break;
    }
    g.weights = dz.transpose() * c.input;
    g.bias = dz.colwise().sum().transpose();
    if (k > 0) {
      delta = dz * layer.weights;
    }
  }
  return grads;
}

/// Mean cross-entropy of the network on (x, labels).
inline double loss_of(const Network& net, const Matrix& x, const Labels& labels) {
  return softmax_cross_entropy(predict_logits(net, x), labels).loss;
}

}  // namespace nilnet
