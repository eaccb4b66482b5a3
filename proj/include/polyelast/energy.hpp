#pragma once

#include <limits>
#include <string>
#include <vector>

#include "polyelast/tensor.hpp"

// Stored-energy models G(xi) = H(F) + R(xi) with uniformly convex R and
// p-growth H, their derivatives, the stress contraction g_{ia}, and a
// sampling-based hypothesis checker.
//
// Default family:  H(F) = kappa * |F|^p  (Frobenius norm),
//                  R(xi) = (gamma/2) * |xi|^2.

namespace polyelast {

struct EnergyParams {
  double kappa = 1.0;
  double gamma = 1.0;
  double p = 7.0;

  // Hessian bounds of the family (H1):
  //   kappa_lo |F|^{p-2} |z|^2 <= z^T D2H z <= kappa_hi |F|^{p-2} |z|^2
  //   gamma_lo I <= D2R <= gamma_hi I
  // For the default family these follow in closed form from kappa, gamma, p.
  double kappa_lo = 0.0;
  double kappa_hi = 0.0;
  double gamma_lo = 0.0;
  double gamma_hi = 0.0;

  // Growth constants recorded for the checker, (H2)-(H5).
  double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;
  double c5 = 0.0, c6 = 0.0, c7 = 0.0, c8 = 0.0;
};

using Hess19 = Eigen::Matrix<double, 19, 19>;

class EnergyModel {
 public:
  /// Validating constructor; throws std::invalid_argument when p <= 6 or
  /// kappa, gamma are not positive. Derived constants are filled in.
  static EnergyModel make(double kappa, double gamma, double p);

  /// Skips parameter validation. Used to build deliberately broken models
  /// (e.g. negative gamma) that the hypothesis checker must flag.
  static EnergyModel make_unchecked(double kappa, double gamma, double p);

  const EnergyParams& params() const { return params_; }

  /// G(xi) = kappa |F|^p + (gamma/2) |xi|^2.
  double eval(const Xi& xi) const;

  /// 19-vector (G_F, G_Z, G_w).
  Xi grad(const Xi& xi) const;

  /// Symmetric 19x19 Hessian, D2H(F) (+) gamma * I.
  Hess19 hess(const Xi& xi) const;

  /// Stress contraction g_{ia}(xi, Ft) = G_{,A}(xi) Phi^A_{,ia}(Ft).
  Mat3 stress(const Xi& xi, const Mat3& f_tilde) const;

 private:
  explicit EnergyModel(EnergyParams p) : params_(p) {}
  EnergyParams params_;
};

// ---------------------------------------------------------------------------
// Hypothesis checker

struct HypothesisViolation {
  std::string hypothesis;  // "H1", "H2", ...
  double margin = 0.0;     // how far past the bound
  Xi witness = Xi::Zero();
};

struct HypothesisReport {
  bool passed = true;
  int samples = 0;
  // Worst-case margins per hypothesis (positive = satisfied with room).
  double h1_margin = std::numeric_limits<double>::infinity();
  double h2_margin = std::numeric_limits<double>::infinity();
  double h3_margin = std::numeric_limits<double>::infinity();
  double h4_margin = std::numeric_limits<double>::infinity();
  double h5_margin = std::numeric_limits<double>::infinity();
  std::vector<HypothesisViolation> violations;
};

/// Samples xi uniformly in a ball of the given radius plus heavy-tail
/// samples and verifies (H1)-(H5) numerically. Violations are reported,
/// not thrown.
HypothesisReport check_hypotheses(const EnergyModel& model, int sample_count,
                                  double radius, unsigned seed = 0);

}  // namespace polyelast
