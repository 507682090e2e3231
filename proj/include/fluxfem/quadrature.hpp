#pragma once

#include <array>
#include <vector>

namespace fluxfem {

/// Symmetric quadrature on the reference triangle in barycentric coordinates.
/// Weights sum to one; integrals are weights dot values times element area.
/// No point lies on a vertex, so integrands may be singular at corners.
struct QuadratureRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int degree = 0;

  static const QuadratureRule& degree4();   // 6 points
  static const QuadratureRule& degree10();  // 25 points
};

/// Gauss-Legendre rule mapped to [0,1], weights summing to one.
/// Exact for polynomials of degree 2n-1.
struct EdgeRule {
  std::vector<double> points;
  std::vector<double> weights;
};
EdgeRule gauss_legendre_01(int n);

}  // namespace fluxfem
