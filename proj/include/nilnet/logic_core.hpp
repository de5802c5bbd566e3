#pragma once

// Nilpotent logic kernels: the generalized cutting function, the logistic
// function, the Squashing function (a smooth approximation of the cutting
// function) with its derivatives, and the threshold-based nilpotent operators.
//
// Everything in here is a pure function of its arguments.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nilnet/errors.hpp"

namespace nilnet {

// ln(1 + e^z) without overflow.
inline double softplus(double z) noexcept {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

// 1 / (1 + e^-z) without overflow.
inline double logistic(double z) noexcept {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// Center, width and sharpness of one Squashing activation.
///
/// lambda must be positive and beta nonzero. A negative beta yields the
/// decreasing counterpart, S(x; -beta) = 1 - S(x; beta).
class SquashingParams {
 public:
  SquashingParams(double a, double lambda, double beta) : a_(a), lambda_(lambda), beta_(beta) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      throw InvalidParameter("squashing: lambda must be positive and finite");
    }
    if (beta == 0.0 || !std::isfinite(beta)) {
      throw InvalidParameter("squashing: beta must be nonzero and finite");
    }
    if (!std::isfinite(a)) {
      throw InvalidParameter("squashing: center must be finite");
    }
  }

  double a() const noexcept { return a_; }
  double lambda() const noexcept { return lambda_; }
  double beta() const noexcept { return beta_; }

  SquashingParams with_beta(double beta) const { return {a_, lambda_, beta}; }

  bool operator==(const SquashingParams&) const = default;

 private:
  double a_;
  double lambda_;
  double beta_;
};

/// Generalized cutting function: 0 below a - lambda/2, 1 above a + lambda/2,
/// linear in between. cut(x, 0.5, 1) is the [.] bracket clamp to [0,1].
inline double cut(double x, double a, double lambda) {
  if (!(lambda > 0.0)) {
    throw InvalidParameter("cut: lambda must be positive");
  }
  return std::clamp((x - (a - lambda / 2.0)) / lambda, 0.0, 1.0);
}

/// Logistic function centered at d with steepness beta.
inline double sigmoid(double x, double d, double beta) noexcept { return logistic(beta * (x - d)); }

namespace detail {

// ln((1 + e^u) / (1 + e^v)). For |u - v| < 1 the ratio is rewritten as
// 1 + sigma(v) * expm1(u - v) so that small beta*lambda keeps full precision.
inline double log_softplus_ratio(double u, double v) noexcept {
  const double d = u - v;
  if (std::abs(d) < 1.0) {
    return std::log1p(logistic(v) * std::expm1(d));
  }
  return softplus(u) - softplus(v);
}

}  // namespace detail

/// Squashing function
///   S(x) = 1/(lambda*beta) * ln[(1 + e^{beta(x - a + lambda/2)}) / (1 + e^{beta(x - a - lambda/2)})].
inline double squash(double x, const SquashingParams& p) noexcept {
  const double beta = p.beta();
  const double lo = x - (p.a() - p.lambda() / 2.0);
  const double hi = x - (p.a() + p.lambda() / 2.0);
  const double s = detail::log_softplus_ratio(beta * lo, beta * hi) / (p.lambda() * beta);
  return std::clamp(s, 0.0, 1.0);
}

/// dS/dx = (sigma_{a-lambda/2}(x) - sigma_{a+lambda/2}(x)) / lambda.
inline double squash_dx(double x, const SquashingParams& p) noexcept {
  const double lo = x - (p.a() - p.lambda() / 2.0);
  const double hi = x - (p.a() + p.lambda() / 2.0);
  return (logistic(p.beta() * lo) - logistic(p.beta() * hi)) / p.lambda();
}

/// dS/dbeta. With p = x - a + lambda/2, q = x - a - lambda/2 and
/// G = softplus(beta p) - softplus(beta q):
///   dS/dbeta = (beta (p sigma(beta p) - q sigma(beta q)) - G) / (lambda beta^2).
/// Near beta*max(|p|,|q|) = 0 that difference cancels, so the Taylor series of
/// softplus around 0 is used instead.
inline double squash_dbeta(double x, const SquashingParams& p) noexcept {
  const double beta = p.beta();
  const double lam = p.lambda();
  const double lo = x - (p.a() - lam / 2.0);
  const double hi = x - (p.a() + lam / 2.0);
  const double scale = std::abs(beta) * std::max(std::abs(lo), std::abs(hi));
  if (scale < 1e-3) {
    const double d2 = lo * lo - hi * hi;
    const double d4 = lo * lo * lo * lo - hi * hi * hi * hi;
    return d2 / (8.0 * lam) - beta * beta * d4 / (64.0 * lam);
  }
  const double g = detail::log_softplus_ratio(beta * lo, beta * hi);
  const double dg = lo * logistic(beta * lo) - hi * logistic(beta * hi);
  return (beta * dg - g) / (lam * beta * beta);
}

/// The limit of squash as |beta| grows: cut for beta > 0, 1 - cut for beta < 0.
inline double crisp_squash(double x, const SquashingParams& p) {
  const double c = cut(x, p.a(), p.lambda());
  return p.beta() > 0.0 ? c : 1.0 - c;
}

/// An increasing bijection of [0,1] and its inverse; operator arithmetic is
/// carried out in the generator's image.
struct GeneratorFn {
  std::string name;
  std::function<double(double)> forward;
  std::function<double(double)> inverse;

  static GeneratorFn identity() {
    return {"identity", [](double x) { return x; }, [](double x) { return x; }};
  }
};

/// Weights w_i and bias C of  f^-1[ clip( sum_i w_i f(x_i) + C ) ].
class NilpotentOperatorSpec {
 public:
  NilpotentOperatorSpec(std::vector<double> weights, double bias)
      : weights_(std::move(weights)), bias_(bias) {
    if (weights_.empty()) {
      throw InvalidParameter("operator spec: weights must be nonempty");
    }
  }

  /// Builds the bias from a decision level nu and per-input thresholds nu_i:
  /// C = f(nu) - sum_i w_i f(nu_i).
  static NilpotentOperatorSpec from_thresholds(std::vector<double> weights, double nu,
                                               std::span<const double> thresholds,
                                               const GeneratorFn& f) {
    if (weights.size() != thresholds.size()) {
      throw ShapeError("operator spec: one threshold per weight required");
    }
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_unit(nu) || !std::all_of(thresholds.begin(), thresholds.end(), in_unit)) {
      throw DomainError("operator spec: thresholds must lie in [0,1]");
    }
    double bias = f.forward(nu);
    for (std::size_t i = 0; i < weights.size(); ++i) {
      bias -= weights[i] * f.forward(thresholds[i]);
    }
    return {std::move(weights), bias};
  }

  const std::vector<double>& weights() const noexcept { return weights_; }
  double bias() const noexcept { return bias_; }
  std::size_t arity() const noexcept { return weights_.size(); }

  bool operator==(const NilpotentOperatorSpec&) const = default;

 private:
  std::vector<double> weights_;
  double bias_;
};

/// Exact cutting function as the clip; `decreasing` selects 1 - cut.
struct Crisp {
  double a = 0.5;
  double lambda = 1.0;
  bool decreasing = false;
};

/// Squashing function as the clip.
struct Soft {
  SquashingParams params{0.5, 1.0, 1.0};
};

using ClipMode = std::variant<Crisp, Soft>;

inline double apply_clip(double z, const ClipMode& mode) {
  return std::visit(
      [z](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Crisp>) {
          const double c = cut(z, m.a, m.lambda);
          return m.decreasing ? 1.0 - c : c;
        } else {
          return squash(z, m.params);
        }
      },
      mode);
}

namespace detail {

inline void require_unit_interval(std::span<const double> xs, const char* who) {
  for (double x : xs) {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw DomainError(std::string(who) + ": input outside [0,1]");
    }
  }
}

}  // namespace detail

/// General operator o_nu(x) = f^-1[ clip( sum f(x_i) - (n-1) f(nu) ) ].
/// nu = 1 gives the conjunction, nu = 0 the disjunction, nu = f^-1(1/2) the
/// self-dual aggregative operator.
inline double general_operator(std::span<const double> xs, double nu, const GeneratorFn& f,
                               const ClipMode& mode = Crisp{}) {
  if (xs.empty()) {
    throw ShapeError("general_operator: no inputs");
  }
  detail::require_unit_interval(xs, "general_operator");
  if (!(nu >= 0.0 && nu <= 1.0)) {
    throw DomainError("general_operator: nu outside [0,1]");
  }
  double sum = f.forward(xs[0]);
  for (std::size_t i = 1; i < xs.size(); ++i) {
    sum += f.forward(xs[i]);
  }
  const double z = sum - static_cast<double>(xs.size() - 1) * f.forward(nu);
  return f.inverse(apply_clip(z, mode));
}

/// Threshold-based operator f^-1[ clip( sum_i w_i f(x_i) + C ) ].
inline double weighted_operator(std::span<const double> xs, const NilpotentOperatorSpec& spec,
                                const GeneratorFn& f, const ClipMode& mode = Crisp{}) {
  if (xs.size() != spec.arity()) {
    throw ShapeError("weighted_operator: " + std::to_string(xs.size()) + " inputs for arity " +
                     std::to_string(spec.arity()));
  }
  detail::require_unit_interval(xs, "weighted_operator");
  const auto& w = spec.weights();
  double z = w[0] * f.forward(xs[0]);
  for (std::size_t i = 1; i < xs.size(); ++i) {
    z += w[i] * f.forward(xs[i]);
  }
  z += spec.bias();
  return f.inverse(apply_clip(z, mode));
}

enum class OperatorKind { conjunction, disjunction, implication, mean, preference, aggregative };

/// (w1, w2, C) of the standard two-variable operators.
inline NilpotentOperatorSpec operator_spec(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::disjunction: return {{1.0, 1.0}, 0.0};
    case OperatorKind::conjunction: return {{1.0, 1.0}, -1.0};
    case OperatorKind::implication: return {{-1.0, 1.0}, 1.0};
    case OperatorKind::mean: return {{0.5, 0.5}, 0.0};
    case OperatorKind::preference: return {{-0.5, 0.5}, 0.5};
    case OperatorKind::aggregative: return {{1.0, 1.0}, -0.5};
  }
  throw InvalidParameter("unknown operator kind");
}

inline double named_operator(OperatorKind kind, double x, double y,
                             const ClipMode& mode = Crisp{}) {
  const double xs[2] = {x, y};
  return weighted_operator(xs, operator_spec(kind), GeneratorFn::identity(), mode);
}

}  // namespace nilnet
