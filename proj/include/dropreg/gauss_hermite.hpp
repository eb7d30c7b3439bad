#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace dropreg {

/// Gauss-Hermite quadrature rule for integrals of the form
/// int exp(-t^2) f(t) dt = sum_k weight[k] * f(node[k]).
/// Expectations under a normal follow as
/// E[f(N(mu, s^2))] = (1/sqrt(pi)) sum_k weight[k] * f(mu + sqrt(2) * s * node[k]).
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Computes the order-n rule by Newton iteration on the orthonormal Hermite
/// recurrence, refined in long double. Nodes come out in ascending order.
inline GaussHermiteRule gauss_hermite_rule(std::size_t n) {
  if (n == 0) throw std::invalid_argument("quadrature order must be positive");
  const long double pi = 3.14159265358979323846264338328L;
  std::vector<long double> x(n), w(n);
  const std::size_t half = (n + 1) / 2;
  long double z = 0.0L;
  for (std::size_t i = 0; i < half; ++i) {
    // Initial guesses for the largest roots, then step down from prior pairs.
    if (i == 0) {
      z = std::sqrt(static_cast<long double>(2 * n + 1)) -
          1.85575L * std::pow(static_cast<long double>(2 * n + 1), -1.0L / 6.0L);
    } else if (i == 1) {
      z -= 1.14L * std::pow(static_cast<long double>(n), 0.426L) / z;
    } else if (i == 2) {
      z = 1.86L * z - 0.86L * x[0];
    } else if (i == 3) {
      z = 1.91L * z - 0.91L * x[1];
    } else {
      z = 2.0L * z - x[i - 2];
    }
    long double pp = 0.0L;
    for (int iter = 0; iter < 200; ++iter) {
      long double p1 = 1.0L / std::sqrt(std::sqrt(pi));
      long double p2 = 0.0L;
      for (std::size_t j = 1; j <= n; ++j) {
        long double p3 = p2;
        p2 = p1;
        long double fj = static_cast<long double>(j);
        p1 = z * std::sqrt(2.0L / fj) * p2 - std::sqrt((fj - 1.0L) / fj) * p3;
      }
      pp = std::sqrt(2.0L * static_cast<long double>(n)) * p2;
      long double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) <= 1e-18L * (1.0L + std::abs(z))) break;
    }
    x[i] = z;
    w[i] = 2.0L / (pp * pp);
  }
  GaussHermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (std::size_t i = 0; i < half; ++i) {
    // Roots are symmetric about zero; mirror the computed half.
    rule.nodes[i] = static_cast<double>(-x[i]);
    rule.weights[i] = static_cast<double>(w[i]);
    rule.nodes[n - 1 - i] = static_cast<double>(x[i]);
    rule.weights[n - 1 - i] = static_cast<double>(w[i]);
  }
  if (n % 2 == 1) rule.nodes[half - 1] = 0.0;
  return rule;
}

constexpr std::size_t kDefaultQuadratureOrder = 50;

/// Shared default rule; built once on first use.
inline const GaussHermiteRule& default_gauss_hermite() {
  static const GaussHermiteRule rule = gauss_hermite_rule(kDefaultQuadratureOrder);
  return rule;
}

/// E[f(N(mu, s^2))] under the given rule.
template <typename F>
double gauss_hermite_expect(const GaussHermiteRule& rule, double mu, double s, F&& f) {
  const double inv_sqrt_pi = 0.56418958354775628694807945156077;
  const double sqrt2 = 1.4142135623730950488016887242097;
  double total = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k)
    total += rule.weights[k] * f(mu + sqrt2 * s * rule.nodes[k]);
  return inv_sqrt_pi * total;
}

}  // namespace dropreg
