#pragma once

// Tensor-product Gauss-Legendre rules with order-doubling error control.

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <type_traits>
#include <utility>
#include <vector>

#include "nanolens/errors.hpp"
#include "nanolens/geometry.hpp"

namespace nanolens {

struct QuadratureSpec {
  int radial_order = 48;
  int angular_order = 48;
  int refinement_limit = 3;
  double rel_tolerance = 1e-8;

  void validate() const {
    if (radial_order < 2 || angular_order < 2)
      throw PreconditionError("quadrature: orders must be >= 2");
    if (refinement_limit < 0) throw PreconditionError("quadrature: refinement_limit must be >= 0");
    if (!(rel_tolerance > 0.0)) throw PreconditionError("quadrature: rel_tolerance must be > 0");
  }

  /// Same spec with both orders doubled.
  QuadratureSpec doubled() const {
    QuadratureSpec s = *this;
    s.radial_order *= 2;
    s.angular_order *= 2;
    return s;
  }

  bool operator==(const QuadratureSpec&) const = default;
};

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

// Newton iteration on P_n from the Chebyshev-like initial guess; symmetric
// pairs are filled together so the rule is exactly symmetric.
inline GaussRule compute_gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    if (n % 2 == 1 && i == half - 1) x = 0.0;
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

// Eigen callables may return expression templates; integrate their plain type.
template <class T, class = void>
struct plain {
  using type = T;
};
template <class T>
struct plain<T, std::void_t<typename T::PlainObject>> {
  using type = typename T::PlainObject;
};
template <class T>
using plain_t = typename plain<std::decay_t<T>>::type;

template <class T>
double magnitude(const T& v) {
  if constexpr (std::is_arithmetic_v<T>) {
    return std::abs(v);
  } else {
    return v.norm();
  }
}

template <class T>
T zero_like() {
  if constexpr (std::is_arithmetic_v<T>) {
    return T{0};
  } else {
    return T::Zero();
  }
}

}  // namespace detail

/// Gauss-Legendre rule on [-1, 1]. Tables are computed once per order and
/// shared read-only; the returned reference stays valid for the program.
inline const GaussRule& gauss_legendre(int order) {
  if (order < 1) throw PreconditionError("gauss_legendre: order must be >= 1");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<const GaussRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[order];
  if (!slot) {
    if (order == 1) {
      slot = std::make_unique<const GaussRule>(GaussRule{{0.0}, {2.0}});
    } else {
      slot = std::make_unique<const GaussRule>(detail::compute_gauss_legendre(order));
    }
  }
  return *slot;
}

inline std::vector<std::pair<double, double>> nodes_weights(int order) {
  const GaussRule& rule = gauss_legendre(order);
  std::vector<std::pair<double, double>> out;
  out.reserve(rule.nodes.size());
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    out.emplace_back(rule.nodes[i], rule.weights[i]);
  return out;
}

template <class T>
struct Estimate {
  T value;
  double rel_error = 0.0;
  int order_a = 0;  ///< nodes along the first coordinate of the accepted rule
  int order_b = 0;
};

/// Fixed-order tensor-product rule over [a0, a1] x [b0, b1]. `f(a, b)` must
/// include any change-of-variables Jacobian.
template <class F>
auto tensor_rule(double a0, double a1, double b0, double b1, int order_a, int order_b,
                 const F& f) {
  using T = detail::plain_t<decltype(f(a0, b0))>;
  const GaussRule& ra = gauss_legendre(order_a);
  const GaussRule& rb = gauss_legendre(order_b);
  const double ha = 0.5 * (a1 - a0);
  const double ca = 0.5 * (a1 + a0);
  const double hb = 0.5 * (b1 - b0);
  const double cb = 0.5 * (b1 + b0);
  T sum = detail::zero_like<T>();
  if (ha == 0.0 || hb == 0.0) return sum;
  for (int i = 0; i < order_a; ++i) {
    const double a = ca + ha * ra.nodes[i];
    T row = detail::zero_like<T>();
    for (int j = 0; j < order_b; ++j) {
      const double b = cb + hb * rb.nodes[j];
      row += rb.weights[j] * f(a, b);
    }
    sum += ra.weights[i] * row;
  }
  sum *= ha * hb;
  return sum;
}

namespace detail {

struct RelativeChange {
  template <class T>
  double operator()(const T& coarse, const T& fine) const {
    const double scale = magnitude(fine);
    const double diff = magnitude(T(coarse - fine));
    return scale > 0.0 ? diff / scale : diff;
  }
};

}  // namespace detail

/// Order-doubling driver: `rule(na, nb)` evaluates a fixed-order rule. Order
/// n is compared against 2n, doubling until `change(coarse, fine)` is within
/// spec.rel_tolerance; past the refinement limit a ConvergenceError carries
/// the last estimate.
template <class Rule, class Change = detail::RelativeChange>
auto refine(const QuadratureSpec& spec, const Rule& rule, const Change& change = {}) {
  using T = detail::plain_t<decltype(rule(2, 2))>;
  int na = spec.radial_order;
  int nb = spec.angular_order;
  T coarse = rule(na, nb);
  double err = 0.0;
  for (int level = 0; level <= spec.refinement_limit; ++level) {
    na *= 2;
    nb *= 2;
    T fine = rule(na, nb);
    err = change(coarse, fine);
    if (err <= spec.rel_tolerance) return Estimate<T>{std::move(fine), err, na, nb};
    coarse = std::move(fine);
  }
  std::ostringstream msg;
  msg << "quadrature did not converge: relative estimate " << err << " > tolerance "
      << spec.rel_tolerance << " at order " << na;
  throw ConvergenceError(msg.str(), err, na);
}

/// Adaptive tensor-product integration of f(a, b) over a rectangle.
template <class F>
auto integrate_rect(double a0, double a1, double b0, double b1, const F& f,
                    const QuadratureSpec& spec) {
  return refine(spec, [&](int na, int nb) { return tensor_rule(a0, a1, b0, b1, na, nb, f); });
}

/// Fixed-order rule over a polar patch; f(x, y) is sampled at the mapped
/// nodes and weighted by r dr dtheta.
template <class F>
auto polar_rule(const PolarPatch& patch, int order_r, int order_theta, const F& f) {
  using T = detail::plain_t<decltype(f(0.0, 0.0))>;
  const GaussRule& rr = gauss_legendre(order_r);
  const GaussRule& rt = gauss_legendre(order_theta);
  const double hr = 0.5 * (patch.r_max - patch.r_min);
  const double cr = 0.5 * (patch.r_max + patch.r_min);
  const double ht = 0.5 * (patch.theta_max - patch.theta_min);
  const double ct = 0.5 * (patch.theta_max + patch.theta_min);
  T sum = detail::zero_like<T>();
  if (hr == 0.0 || ht == 0.0) return sum;
  std::vector<double> cs(order_theta), sn(order_theta);
  for (int j = 0; j < order_theta; ++j) {
    const double theta = ct + ht * rt.nodes[j];
    cs[j] = std::cos(theta);
    sn[j] = std::sin(theta);
  }
  for (int i = 0; i < order_r; ++i) {
    const double r = cr + hr * rr.nodes[i];
    T ring = detail::zero_like<T>();
    for (int j = 0; j < order_theta; ++j) ring += rt.weights[j] * f(r * cs[j], r * sn[j]);
    sum += (rr.weights[i] * r) * ring;
  }
  sum *= hr * ht;
  return sum;
}

/// Adaptive integration of f(x, y) over a polar patch (Jacobian r dr dtheta).
template <class F>
auto integrate_patch(const PolarPatch& patch, const F& f, const QuadratureSpec& spec) {
  return refine(spec, [&](int nr, int nt) { return polar_rule(patch, nr, nt, f); });
}

}  // namespace nanolens
