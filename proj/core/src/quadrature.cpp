#include "csq/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace csq {

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need n >= 1");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Chebyshev-based initial guess, then Newton on P_n.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

QuadratureRule gauss_legendre(int n, double a, double b) {
  QuadratureRule rule = gauss_legendre(n);
  const double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = mid + hw * rule.nodes[i];
    rule.weights[i] *= hw;
  }
  return rule;
}

QuadratureRule periodic_trapezoid(int n, double period) {
  if (n < 1) throw std::invalid_argument("periodic_trapezoid: need n >= 1");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.assign(n, period / n);
  for (int i = 0; i < n; ++i) rule.nodes[i] = period * i / n;
  return rule;
}

void PhaseSpaceQuadrature::validate() const {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw std::invalid_argument("PhaseSpaceQuadrature: radius must be finite and > 0");
  if (nodes_per_axis < 2)
    throw std::invalid_argument("PhaseSpaceQuadrature: need at least 2 nodes per axis");
  if (radius * radius > 2500.0)
    throw std::invalid_argument("PhaseSpaceQuadrature: radius too large, Gaussian weights underflow");
}

}  // namespace csq
