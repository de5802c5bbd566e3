#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "nilnet/errors.hpp"
#include "nilnet/network.hpp"

namespace nilnet {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First and second moment estimates for one parameter.
template <class T>
struct Moments {
  T m;
  T v;
};

/// One bias-corrected Adam update of a scalar. `step` counts from 1.
inline void adam_update(double& param, double grad, Moments<double>& mom, std::int64_t step,
                        double lr, const AdamConfig& cfg) {
  mom.m = cfg.beta1 * mom.m + (1.0 - cfg.beta1) * grad;
  mom.v = cfg.beta2 * mom.v + (1.0 - cfg.beta2) * grad * grad;
  const double m_hat = mom.m / (1.0 - std::pow(cfg.beta1, static_cast<double>(step)));
  const double v_hat = mom.v / (1.0 - std::pow(cfg.beta2, static_cast<double>(step)));
  param -= lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
}

/// Element-wise Adam update of a dense Eigen object.
template <class Param, class Grad>
void adam_update(Eigen::DenseBase<Param>& param, const Eigen::DenseBase<Grad>& grad,
                 Moments<Param>& mom, std::int64_t step, double lr, const AdamConfig& cfg) {
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  auto g = grad.derived().array();
  mom.m.array() = cfg.beta1 * mom.m.array() + (1.0 - cfg.beta1) * g;
  mom.v.array() = cfg.beta2 * mom.v.array() + (1.0 - cfg.beta2) * g.square();
  param.derived().array() -=
      lr * (mom.m.array() / c1) / ((mom.v.array() / c2).sqrt() + cfg.epsilon);
}

struct LayerAdamState {
  Moments<Matrix> weights;
  Moments<Vector> bias;
  Moments<double> beta{0.0, 0.0};
};

struct AdamState {
  std::vector<LayerAdamState> layers;
  std::int64_t step = 0;

  static AdamState zeros_like(const Network& net) {
    AdamState s;
    for (const auto& l : net.layers) {
      LayerAdamState ls;
      ls.weights = {Matrix::Zero(l.fan_out(), l.fan_in()), Matrix::Zero(l.fan_out(), l.fan_in())};
      ls.bias = {Vector::Zero(l.fan_out()), Vector::Zero(l.fan_out())};
      s.layers.push_back(std::move(ls));
    }
    return s;
  }
};

/// Applies one Adam step to every trainable parameter of `net`.
/// Frozen parameters, and their moment estimates, are left untouched.
inline void adam_step(Network& net, const Gradients& grads, AdamState& state, double lr,
                      const AdamConfig& cfg = {}) {
  if (grads.size() != net.layers.size() || state.layers.size() != net.layers.size()) {
    throw ShapeError("adam_step: gradients/state do not match network");
  }
  ++state.step;
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    DenseLayer& layer = net.layers[k];
    LayerAdamState& s = state.layers[k];
    const LayerGradients& g = grads[k];
    if (layer.trainable_weights) {
      adam_update(layer.weights, g.weights, s.weights, state.step, lr, cfg);
    }
    if (layer.trainable_bias) {
      adam_update(layer.bias, g.bias, s.bias, state.step, lr, cfg);
    }
    if (layer.activation.is_squashing() && layer.trainable_beta) {
      const double before = layer.beta;
      adam_update(layer.beta, g.beta, s.beta, state.step, lr, cfg);
      // beta == 0 is outside the Squashing family.
      if (layer.beta == 0.0) {
        layer.beta = std::copysign(1e-12, before);
      }
    }
  }
}

}  // namespace nilnet
