#pragma once

#include <Eigen/Dense>
#include <vector>

namespace polyelast {

// Quadrature on the reference tetrahedron with vertices
// (0,0,0), (1,0,0), (0,1,0), (0,0,1).  Weights sum to 1/6.
struct QuadratureRule {
  std::vector<Eigen::Vector3d> points;
  std::vector<double> weights;
  int order = 0;  // polynomial degree integrated exactly
};

/// Rule exact to the declared order, 1 <= order <= 6.
/// Orders 1-3 use the classical symmetric rules; higher orders fall back
/// to a collapsed tensor Gauss rule (exact by construction).
QuadratureRule quadrature(int order);

/// Collapsed (Duffy) tensor-product Gauss rule, exact for any polynomial
/// of total degree <= order. Used internally where order > 6 is needed.
QuadratureRule duffy_rule(int order);

/// Gauss-Legendre nodes/weights on [0,1].
void gauss_legendre_01(int q, std::vector<double>& x, std::vector<double>& w);

}  // namespace polyelast
