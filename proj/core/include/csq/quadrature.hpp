#ifndef CSQ_QUADRATURE_HPP
#define CSQ_QUADRATURE_HPP

#include <vector>

namespace csq {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1, 1]; exact for polynomials of degree 2n-1.
QuadratureRule gauss_legendre(int n);

/// Gauss-Legendre rule mapped to [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

/// Uniform trapezoid rule for periodic integrands on [0, period).
QuadratureRule periodic_trapezoid(int n, double period);

/// Square tensor-product Gauss-Legendre grid on [-radius, radius]^2 used for
/// phase-space integrals against dp dq.
struct PhaseSpaceQuadrature {
  double radius = 10.0;
  int nodes_per_axis = 160;

  void validate() const;
};

}  // namespace csq

#endif
