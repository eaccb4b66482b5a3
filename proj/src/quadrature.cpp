#include "polyelast/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace polyelast {

void gauss_legendre_01(int q, std::vector<double>& x, std::vector<double>& w) {
  x.assign(q, 0.0);
  w.assign(q, 0.0);
  // Nodes on [-1,1] by Newton on Legendre P_q, then map to [0,1].
  for (int i = 0; i < q; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (q + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int j = 2; j <= q; ++j) {
        const double p2 = ((2.0 * j - 1.0) * t * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = q * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    x[i] = 0.5 * (1.0 + t);
    w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
  }
}

QuadratureRule duffy_rule(int order) {
  // x = u, y = v(1-u), z = w(1-u)(1-v); Jacobian (1-u)^2 (1-v).
  // A total-degree-d monomial pulls back to degree <= d+2 per axis.
  const int q = (order + 3 + 1) / 2;  // 2q-1 >= order+2
  std::vector<double> gx, gw;
  gauss_legendre_01(q, gx, gw);
  QuadratureRule rule;
  rule.order = order;
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b)
      for (int c = 0; c < q; ++c) {
        const double u = gx[a], v = gx[b], w = gx[c];
        rule.points.emplace_back(u, v * (1.0 - u), w * (1.0 - u) * (1.0 - v));
        rule.weights.push_back(gw[a] * gw[b] * gw[c] * (1.0 - u) * (1.0 - u) *
                               (1.0 - v));
      }
  return rule;
}

QuadratureRule quadrature(int order) {
  if (order < 1 || order > 6)
    throw std::invalid_argument("quadrature order must be in [1,6]");
  QuadratureRule rule;
  rule.order = order;
  switch (order) {
    case 1:
      rule.points = {{0.25, 0.25, 0.25}};
      rule.weights = {1.0 / 6.0};
      return rule;
    case 2: {
      const double a = (5.0 + 3.0 * std::sqrt(5.0)) / 20.0;
      const double b = (5.0 - std::sqrt(5.0)) / 20.0;
      rule.points = {{a, b, b}, {b, a, b}, {b, b, a}, {b, b, b}};
      rule.weights = {1.0 / 24.0, 1.0 / 24.0, 1.0 / 24.0, 1.0 / 24.0};
      return rule;
    }
    case 3: {
      const double a = 0.5, b = 1.0 / 6.0;
      rule.points = {{0.25, 0.25, 0.25}, {a, b, b}, {b, a, b}, {b, b, a},
                     {b, b, b}};
      rule.weights = {-2.0 / 15.0, 3.0 / 40.0, 3.0 / 40.0, 3.0 / 40.0,
                      3.0 / 40.0};
      return rule;
    }
    default:
      return duffy_rule(order);
  }
}

}  // namespace polyelast
